//! RSA key containers with PKCS#1 DER encoding.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Error(pub String);

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "rsa: {}", self.0)
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

mod der {
    use super::{Error, Result};

    /// Splits a DER SEQUENCE into the raw encodings of its elements.
    pub fn sequence(bytes: &[u8]) -> Result<Vec<&[u8]>> {
        let (tag, body, rest) = element(bytes)?;
        if tag != 0x30 || !rest.is_empty() {
            return Err(Error("expected a single DER SEQUENCE".into()));
        }
        let mut out = Vec::new();
        let mut cur = body;
        while !cur.is_empty() {
            let start = cur;
            let (_, _, rest) = element(cur)?;
            out.push(&start[..start.len() - rest.len()]);
            cur = rest;
        }
        Ok(out)
    }

    fn element(bytes: &[u8]) -> Result<(u8, &[u8], &[u8])> {
        if bytes.len() < 2 {
            return Err(Error("truncated DER".into()));
        }
        let tag = bytes[0];
        let (len, header) = if bytes[1] < 0x80 {
            (bytes[1] as usize, 2)
        } else {
            let n = (bytes[1] & 0x7f) as usize;
            if n == 0 || n > 4 || bytes.len() < 2 + n {
                return Err(Error("bad DER length".into()));
            }
            let mut len = 0usize;
            for b in &bytes[2..2 + n] {
                len = (len << 8) | *b as usize;
            }
            (len, 2 + n)
        };
        if bytes.len() < header + len {
            return Err(Error("truncated DER".into()));
        }
        Ok((tag, &bytes[header..header + len], &bytes[header + len..]))
    }

    pub fn wrap_sequence(parts: &[&[u8]]) -> Vec<u8> {
        let body: Vec<u8> = parts.concat();
        let mut out = vec![0x30];
        if body.len() < 0x80 {
            out.push(body.len() as u8);
        } else {
            let len = (body.len() as u32).to_be_bytes();
            let skip = len.iter().take_while(|b| **b == 0).count();
            out.push(0x80 | (4 - skip) as u8);
            out.extend_from_slice(&len[skip..]);
        }
        out.extend_from_slice(&body);
        out
    }
}

mod key {
    use super::{der, Error, Result};

    /// Represents a whole RSA private key.
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct RsaPrivateKey {
        pub(crate) der: Vec<u8>,
    }

    impl RsaPrivateKey {
        pub(crate) fn parse(bytes: &[u8]) -> Result<RsaPrivateKey> {
            let parts = der::sequence(bytes)?;
            if parts.len() < 9 || parts.iter().any(|p| p[0] != 0x02) {
                return Err(Error("not a PKCS#1 private key".into()));
            }
            Ok(RsaPrivateKey { der: bytes.to_vec() })
        }

        /// Get the public key from the private key.
        pub fn to_public_key(&self) -> RsaPublicKey {
            let parts = der::sequence(&self.der).expect("validated");
            RsaPublicKey { der: der::wrap_sequence(&[parts[1], parts[2]]) }
        }
    }

    /// Represents the public part of an RSA key.
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct RsaPublicKey {
        pub(crate) der: Vec<u8>,
    }

    impl RsaPublicKey {
        pub(crate) fn parse(bytes: &[u8]) -> Result<RsaPublicKey> {
            let parts = der::sequence(bytes)?;
            if parts.len() != 2 || parts.iter().any(|p| p[0] != 0x02) {
                return Err(Error("not a PKCS#1 public key".into()));
            }
            Ok(RsaPublicKey { der: bytes.to_vec() })
        }
    }
}

pub mod pkcs1 {
    use super::{Result, RsaPrivateKey, RsaPublicKey};

    pub struct SecretDocument(Vec<u8>);
    pub struct Document(Vec<u8>);

    impl SecretDocument {
        pub fn as_bytes(&self) -> &[u8] {
            &self.0
        }
        pub fn to_vec(&self) -> Vec<u8> {
            self.0.clone()
        }
    }

    impl Document {
        pub fn as_bytes(&self) -> &[u8] {
            &self.0
        }
        pub fn to_vec(&self) -> Vec<u8> {
            self.0.clone()
        }
    }

    pub trait DecodeRsaPrivateKey: Sized {
        fn from_pkcs1_der(bytes: &[u8]) -> Result<Self>;
    }

    pub trait EncodeRsaPrivateKey {
        fn to_pkcs1_der(&self) -> Result<SecretDocument>;
    }

    pub trait DecodeRsaPublicKey: Sized {
        fn from_pkcs1_der(bytes: &[u8]) -> Result<Self>;
    }

    pub trait EncodeRsaPublicKey {
        fn to_pkcs1_der(&self) -> Result<Document>;
    }

    impl DecodeRsaPrivateKey for RsaPrivateKey {
        fn from_pkcs1_der(bytes: &[u8]) -> Result<Self> {
            RsaPrivateKey::parse(bytes)
        }
    }

    impl EncodeRsaPrivateKey for RsaPrivateKey {
        fn to_pkcs1_der(&self) -> Result<SecretDocument> {
            Ok(SecretDocument(self.der.clone()))
        }
    }

    impl DecodeRsaPublicKey for RsaPublicKey {
        fn from_pkcs1_der(bytes: &[u8]) -> Result<Self> {
            RsaPublicKey::parse(bytes)
        }
    }

    impl EncodeRsaPublicKey for RsaPublicKey {
        fn to_pkcs1_der(&self) -> Result<Document> {
            Ok(Document(self.der.clone()))
        }
    }
}

pub use key::{RsaPrivateKey, RsaPublicKey};
