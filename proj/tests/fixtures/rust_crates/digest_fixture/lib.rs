//! Traits which describe functionality of cryptographic hash functions.

pub type Output<D> = <D as Digest>::Output;

/// Convenience wrapper trait covering functionality of cryptographic hash
/// functions with fixed output size.
pub trait Digest: Sized {
    type Output: AsRef<[u8]>;

    fn new() -> Self;
    fn update(&mut self, data: impl AsRef<[u8]>);
    fn finalize(self) -> Self::Output;

    fn digest(data: impl AsRef<[u8]>) -> Self::Output {
        let mut h = Self::new();
        h.update(data);
        h.finalize()
    }
}

pub mod core_api {
    /// Types which process data in blocks.
    pub trait BlockSizeUser {
        fn block_size() -> usize;
    }
}
