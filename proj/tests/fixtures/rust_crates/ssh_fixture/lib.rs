//! SSH public keys in the SSH wire format.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Error(pub String);

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ssh: {}", self.0)
    }
}

impl std::error::Error for Error {}

mod public {
    use super::Error;

    /// An SSH public key: algorithm name followed by the key blob.
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct PublicKey {
        algorithm: String,
        wire: Vec<u8>,
    }

    impl PublicKey {
        /// Parses the SSH wire encoding (length-prefixed algorithm name first).
        pub fn from_bytes(bytes: &[u8]) -> Result<PublicKey, Error> {
            if bytes.len() < 4 {
                return Err(Error("truncated key".into()));
            }
            let n = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
            if n == 0 || bytes.len() < 4 + n {
                return Err(Error("truncated algorithm name".into()));
            }
            let algorithm = std::str::from_utf8(&bytes[4..4 + n]).map_err(|_| Error("algorithm not utf-8".into()))?;
            if !algorithm.starts_with("ssh-") {
                return Err(Error(format!("unknown algorithm {}", algorithm)));
            }
            Ok(PublicKey { algorithm: algorithm.to_string(), wire: bytes.to_vec() })
        }

        /// The SSH wire encoding.
        pub fn to_bytes(&self) -> Result<Vec<u8>, Error> {
            Ok(self.wire.clone())
        }

        pub fn algorithm(&self) -> &str {
            &self.algorithm
        }
    }
}

pub use public::PublicKey;
