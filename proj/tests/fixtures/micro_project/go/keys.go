package keys

import (
	"crypto/ed25519"
	"crypto/sha512"
	"fmt"
)

// KeyPair is an ed25519 private key with a display label.
type KeyPair struct {
	Private ed25519.PrivateKey
	Label   string
}

// Identity is a named set of key pairs.
type Identity struct {
	Name string
	Keys []KeyPair
}

func ed25519PrivateKeyToCurve25519(pk ed25519.PrivateKey) []byte {
	h := sha512.New()
	h.Write(pk.Seed())
	out := h.Sum(nil)
	return out[:32]
}

// Describe returns the name followed by the number of keys.
func (id Identity) Describe() string {
	return fmt.Sprintf("%s (%d keys)", id.Name, len(id.Keys))
}
