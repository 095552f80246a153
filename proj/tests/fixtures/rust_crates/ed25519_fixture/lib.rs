//! Ed25519 key handling: signing keys, verifying keys and signature bytes.
//! Public keys are derived with real curve arithmetic; signing is not offered.

mod field {
    const MASK: u64 = (1 << 51) - 1;

    #[derive(Clone, Copy)]
    pub struct Fe(pub [u64; 5]);

    impl Fe {
        pub const ZERO: Fe = Fe([0, 0, 0, 0, 0]);
        pub const ONE: Fe = Fe([1, 0, 0, 0, 0]);

        fn carry(mut l: [u64; 5]) -> Fe {
            for _ in 0..2 {
                for i in 0..4 {
                    l[i + 1] += l[i] >> 51;
                    l[i] &= MASK;
                }
                l[0] += 19 * (l[4] >> 51);
                l[4] &= MASK;
            }
            Fe(l)
        }

        pub fn add(&self, o: &Fe) -> Fe {
            let mut l = [0u64; 5];
            for i in 0..5 {
                l[i] = self.0[i] + o.0[i];
            }
            Fe::carry(l)
        }

        pub fn sub(&self, o: &Fe) -> Fe {
            const TWO_P: [u64; 5] = [0xFFFFFFFFFFFDA, 0xFFFFFFFFFFFFE, 0xFFFFFFFFFFFFE, 0xFFFFFFFFFFFFE, 0xFFFFFFFFFFFFE];
            let mut l = [0u64; 5];
            for i in 0..5 {
                l[i] = self.0[i] + TWO_P[i] - o.0[i];
            }
            Fe::carry(l)
        }

        pub fn mul(&self, o: &Fe) -> Fe {
            let a = self.0.map(|v| v as u128);
            let b = o.0.map(|v| v as u128);
            let b19 = [b[0], b[1] * 19, b[2] * 19, b[3] * 19, b[4] * 19];
            let r0 = a[0] * b[0] + a[1] * b19[4] + a[2] * b19[3] + a[3] * b19[2] + a[4] * b19[1];
            let r1 = a[0] * b[1] + a[1] * b[0] + a[2] * b19[4] + a[3] * b19[3] + a[4] * b19[2];
            let r2 = a[0] * b[2] + a[1] * b[1] + a[2] * b[0] + a[3] * b19[4] + a[4] * b19[3];
            let r3 = a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0] + a[4] * b19[4];
            let r4 = a[0] * b[4] + a[1] * b[3] + a[2] * b[2] + a[3] * b[1] + a[4] * b[0];
            let mut r = [r0, r1, r2, r3, r4];
            for i in 0..4 {
                r[i + 1] += r[i] >> 51;
                r[i] &= MASK as u128;
            }
            r[0] += 19 * (r[4] >> 51);
            r[4] &= MASK as u128;
            Fe::carry(r.map(|v| v as u64))
        }

        pub fn invert(&self) -> Fe {
            // x^(p-2) with p-2 = 2^255 - 21: bits 0..=254 set except 2 and 4.
            let mut r = Fe::ONE;
            for i in (0..255).rev() {
                r = r.mul(&r);
                if i != 2 && i != 4 {
                    r = r.mul(self);
                }
            }
            r
        }

        pub fn to_bytes(&self) -> [u8; 32] {
            let mut h = Fe::carry(self.0).0;
            let mut q = (h[0] + 19) >> 51;
            for i in 1..5 {
                q = (h[i] + q) >> 51;
            }
            h[0] += 19 * q;
            for i in 0..4 {
                h[i + 1] += h[i] >> 51;
                h[i] &= MASK;
            }
            h[4] &= MASK;
            let mut out = [0u8; 32];
            let mut acc: u128 = 0;
            let mut bits = 0;
            let mut pos = 0;
            for limb in h {
                acc |= (limb as u128) << bits;
                bits += 51;
                while bits >= 8 && pos < 32 {
                    out[pos] = acc as u8;
                    acc >>= 8;
                    bits -= 8;
                    pos += 1;
                }
            }
            if pos < 32 {
                out[pos] = acc as u8;
            }
            out
        }
    }
}

mod point {
    use super::field::Fe;

    const D2: Fe = Fe([1859910466990425, 932731440258426, 1072319116312658, 1815898335770999, 633789495995903]);
    const BX: Fe = Fe([1738742601995546, 1146398526822698, 2070867633025821, 562264141797630, 587772402128613]);
    const BY: Fe = Fe([1801439850948184, 1351079888211148, 450359962737049, 900719925474099, 1801439850948198]);
    const BT: Fe = Fe([1841354044333475, 16398895984059, 755974180946558, 900171276175154, 1821297809914039]);

    #[derive(Clone, Copy)]
    struct Point {
        x: Fe,
        y: Fe,
        z: Fe,
        t: Fe,
    }

    impl Point {
        fn add(&self, o: &Point) -> Point {
            let a = self.y.sub(&self.x).mul(&o.y.sub(&o.x));
            let b = self.y.add(&self.x).mul(&o.y.add(&o.x));
            let c = self.t.mul(&D2).mul(&o.t);
            let d = self.z.add(&self.z).mul(&o.z);
            let e = b.sub(&a);
            let f = d.sub(&c);
            let g = d.add(&c);
            let h = b.add(&a);
            Point { x: e.mul(&f), y: g.mul(&h), z: f.mul(&g), t: e.mul(&h) }
        }
    }

    /// Compressed encoding of scalar * B, scalar little-endian.
    pub fn mul_base(scalar: &[u8; 32]) -> [u8; 32] {
        let base = Point { x: BX, y: BY, z: Fe::ONE, t: BT };
        let mut acc = Point { x: Fe::ZERO, y: Fe::ONE, z: Fe::ONE, t: Fe::ZERO };
        for i in (0..256).rev() {
            acc = acc.add(&acc);
            if (scalar[i / 8] >> (i % 8)) & 1 == 1 {
                acc = acc.add(&base);
            }
        }
        let zinv = acc.z.invert();
        let x = acc.x.mul(&zinv).to_bytes();
        let mut y = acc.y.mul(&zinv).to_bytes();
        y[31] ^= (x[0] & 1) << 7;
        y
    }
}

mod signing {
    use super::verifying::VerifyingKey;

    pub(crate) trait Sealed {
        fn clamp_scalar(&self) -> [u8; 32];
    }

    /// ed25519 signing key (private key).
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct SigningKey {
        seed: [u8; 32],
        public: [u8; 32],
    }

    impl SigningKey {
        /// Construct a signing key from a 32 byte secret key seed.
        pub fn from_bytes(secret_key: &[u8; 32]) -> SigningKey {
            let mut key = SigningKey { seed: *secret_key, public: [0u8; 32] };
            key.public = super::point::mul_base(&key.clamp_scalar());
            key
        }

        /// The 32 byte secret key seed.
        pub fn to_bytes(&self) -> [u8; 32] {
            self.seed
        }

        /// Seed followed by the public key.
        pub fn to_keypair_bytes(&self) -> [u8; 64] {
            let mut out = [0u8; 64];
            out[..32].copy_from_slice(&self.seed);
            out[32..].copy_from_slice(&self.public);
            out
        }

        pub fn verifying_key(&self) -> VerifyingKey {
            VerifyingKey::from_bytes(&self.public).expect("derived key")
        }
    }

    impl Sealed for SigningKey {
        fn clamp_scalar(&self) -> [u8; 32] {
            use sha2_fixture::{Digest, Sha512};
            let h = Sha512::digest(self.seed);
            let mut s = [0u8; 32];
            s.copy_from_slice(&h[..32]);
            s[0] &= 248;
            s[31] &= 127;
            s[31] |= 64;
            s
        }
    }
}

mod verifying {
    use super::SignatureError;

    /// ed25519 public key.
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub struct VerifyingKey {
        bytes: [u8; 32],
    }

    impl VerifyingKey {
        /// Accepts any 32-byte string; no curve-point validation.
        pub fn from_bytes(bytes: &[u8; 32]) -> Result<VerifyingKey, SignatureError> {
            Ok(VerifyingKey { bytes: *bytes })
        }

        pub fn to_bytes(&self) -> [u8; 32] {
            self.bytes
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureError;

impl std::fmt::Display for SignatureError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("signature error")
    }
}

impl std::error::Error for SignatureError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    bytes: [u8; 64],
}

impl Signature {
    pub fn from_bytes(bytes: &[u8; 64]) -> Signature {
        Signature { bytes: *bytes }
    }

    pub fn to_bytes(&self) -> [u8; 64] {
        self.bytes
    }
}

pub mod constants {
    pub fn secret_key_length() -> usize {
        32
    }
}

pub use signing::SigningKey;
pub use verifying::VerifyingKey;

