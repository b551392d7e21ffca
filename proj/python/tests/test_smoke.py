import os
import subprocess

import pytest

import abem


@pytest.fixture(scope="module")
def keys():
    pk, mk = abem.setup()
    return pk, mk


def test_round_trip(keys):
    pk, mk = keys
    sk = abem.keygen(pk, mk, ["C"])
    msg = os.urandom(5000)
    ct = abem.encrypt(pk, "(A and B) or C", msg)
    assert abem.decrypt(pk, sk, ct) == msg
    assert abem.kind(ct) == "CIPHERTEXT"


def test_unsatisfied_key_is_refused(keys):
    pk, mk = keys
    sk = abem.keygen(pk, mk, ["A"])
    ct = abem.encrypt(pk, "(A and B) or C", b"secret")
    with pytest.raises(abem.UnsatisfiedError):
        abem.decrypt(pk, sk, ct)


def test_cached_machine_is_reusable(keys):
    pk, mk = keys
    sk = abem.keygen(pk, mk, ["A", "B"])
    em = abem.build_em(pk, "2 of (A, B, C)")
    cts = [abem.em_encrypt(pk, em, bytes([i]) * 100) for i in range(3)]
    assert len(set(cts)) == 3
    assert [abem.decrypt(pk, sk, c) for c in cts] == [bytes([i]) * 100 for i in range(3)]


def test_outsourced_decryption(keys):
    pk, mk = keys
    sk = abem.keygen(pk, mk, ["A", "B"])
    tk, rk = abem.gen_tk(pk, sk)
    ct = abem.encrypt(pk, "A and B", b"outsourced")
    partial = abem.transform(tk, ct)
    assert abem.recover(pk, rk, ct, partial) == b"outsourced"

    weak_tk, _ = abem.gen_tk(pk, abem.keygen(pk, mk, ["A"]))
    assert abem.transform(weak_tk, ct) is None

    other = abem.encrypt(pk, "A and B", b"other")
    with pytest.raises(abem.EchoMismatchError):
        abem.recover(pk, rk, ct, abem.transform(tk, other))


def test_tampering_is_detected(keys):
    pk, mk = keys
    sk = abem.keygen(pk, mk, ["A"])
    ct = bytearray(abem.encrypt(pk, "A", b"payload"))
    ct[-1] ^= 1
    with pytest.raises((abem.AuthenticationError, abem.VerificationError)):
        abem.decrypt(pk, sk, bytes(ct))
    with pytest.raises(abem.DecodeError):
        abem.decrypt(pk, sk, b"not an object")


def test_armor_and_policy_helpers(keys):
    pk, _ = keys
    text = abem.armor(pk)
    assert text.startswith("-----BEGIN ABEM PUBLIC KEY-----")
    assert abem.dearmor(text) == pk
    assert abem.normalize_policy("A and B and C") == abem.normalize_policy("(A and B and C)")
    with pytest.raises(abem.UsageError):
        abem.normalize_policy("A and")


def test_seeded_calls_are_deterministic():
    assert abem.setup(seed="s") == abem.setup(seed="s")
    assert abem.setup(seed="s") != abem.setup(seed="t")
    policy, attrs = abem.gen_random_tree(10, 100, seed="x")
    assert abem.gen_random_tree(10, 100, seed="x") == (policy, attrs)
    assert attrs and all(a.startswith("attr") for a in attrs)


@pytest.mark.skipif("ABEM_CLI" not in os.environ, reason="command-line tool path not given")
def test_cli_matches_library(tmp_path):
    cli = os.environ["ABEM_CLI"]
    subprocess.run([cli, "--seed", "same", "setup", "--pk", tmp_path / "pk", "--mk", tmp_path / "mk"], check=True)
    pk, mk = abem.setup(seed="same")
    assert (tmp_path / "pk").read_bytes() == pk
    assert (tmp_path / "mk").read_bytes() == mk

    (tmp_path / "msg").write_bytes(b"via the tool")
    subprocess.run([cli, "--seed", "enc", "encrypt", "--pk", tmp_path / "pk", "--policy", "A or B",
                    "--in", tmp_path / "msg", "--out", tmp_path / "ct"], check=True)
    assert (tmp_path / "ct").read_bytes() == abem.encrypt(pk, "A or B", b"via the tool", seed="enc")
