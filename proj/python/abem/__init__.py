"""Attribute-based encryption with cached encryption machines and
outsourced, verifiable decryption. Keys and ciphertexts are bytes."""

from ._core import (
    AbemError,
    AuthenticationError,
    DecodeError,
    EchoMismatchError,
    NetworkError,
    UnsatisfiedError,
    UsageError,
    VerificationError,
    armor,
    build_em,
    dearmor,
    decrypt,
    em_encrypt,
    encrypt,
    gen_random_tree,
    gen_tk,
    keygen,
    kind,
    normalize_policy,
    recover,
    setup,
    transform,
)

__all__ = [name for name in dir() if not name.startswith("_")]
