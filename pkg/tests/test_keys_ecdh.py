import math

import pytest

from helpers import graph, star, world
from wsnkey.costmodel import DEFAULT_CONSTANTS, EnergyLedger
from wsnkey.errors import ParameterError
from wsnkey.keys_ecdh import (
    ECDHScheme,
    NoSecurity,
    SignatureCredential,
    authenticated_establish,
    ecdh_establish,
    ecdh_establish_links,
    generate_keypair,
)
from wsnkey.links import LinkKind
from wsnkey.netconfig import run_configuration
from wsnkey.topology import deploy


def test_pairwise_symmetry_and_uniqueness():
    u, v, w = (generate_keypair(i, 1) for i in range(3))
    assert ecdh_establish(u, v).token == ecdh_establish(v, u).token
    assert ecdh_establish(u, v).token != ecdh_establish(u, w).token
    assert ecdh_establish(u, v).kind is LinkKind.PAIRWISE


def test_public_token_is_function_of_private():
    a, b = generate_keypair(4, 9), generate_keypair(4, 9)
    assert a.public_token == b.public_token
    assert generate_keypair(5, 9).public_token != a.public_token


def test_one_pointmul_per_side():
    lu, lv = EnergyLedger(), EnergyLedger()
    ecdh_establish(generate_keypair(0, 0), generate_keypair(1, 0), lu, lv)
    assert lu.pointmuls == lv.pointmuls == 1


def test_authenticated_establish():
    u, v = generate_keypair(0, 0), generate_keypair(1, 0)
    ok = {0: SignatureCredential(0), 1: SignatureCredential(1)}
    lu, lv = EnergyLedger(), EnergyLedger()
    assert authenticated_establish(u, v, ok, lu, lv) is not None
    assert lu.verifies + lv.verifies == 2
    bad = {0: SignatureCredential(0), 1: SignatureCredential(1, valid=False)}
    lu, lv = EnergyLedger(), EnergyLedger()
    assert authenticated_establish(u, v, bad, lu, lv) is None
    assert lu.pointmuls == lv.pointmuls == 0


def test_isolated_node_one_broadcast():
    t = graph(1, [])
    layer = ECDHScheme().build(t, 0)
    w = world(t)
    assert ecdh_establish_links(layer, w, 0) == []
    assert w.ledger(0).tx_bits == 352 and w.ledger(0).rx_bits == 0


def test_proactive_star_matches_closed_form_counts():
    d = 8
    t = star(d)
    layer = ECDHScheme().build(t, 0)
    w = world(t, "proactive")
    ecdh_establish_links(layer, w, 0)
    led = w.ledger(0)
    assert led.pointmuls == d
    assert led.tx_bits == 352 and led.rx_bits == 352 * d


def test_straight_rejected():
    t = star(2)
    layer = ECDHScheme().build(t, 0)
    with pytest.raises(ParameterError):
        ecdh_establish_links(layer, world(t, "straight"), 0)
    with pytest.raises(ParameterError):
        run_configuration(t, ECDHScheme(), "straight")


def test_invalid_credential_blocks_link():
    t = star(3)
    scheme = ECDHScheme(rsa_overlay=True, invalid_credentials=frozenset({2}))
    layer = scheme.build(t, 0)
    w = world(t, "proactive")
    ecdh_establish_links(layer, w, 0)
    assert set(w.links) == {(0, 1), (0, 3)}
    assert (0, 2) in layer.refused


@pytest.mark.parametrize("selection", ["proactive", "reactive"])
def test_pointmuls_twice_links(selection):
    t = deploy(300, 8, 2)
    o = run_configuration(t, ECDHScheme(), selection, seed=2)
    assert o.ledger.pointmuls == 2 * len(o.links)


@pytest.mark.parametrize("selection", ["proactive", "reactive"])
def test_rsa_overlay_delta_is_exact(selection):
    t = deploy(300, 8, 5)
    plain = run_configuration(t, ECDHScheme(), selection, seed=5).ledger
    rsa = run_configuration(t, ECDHScheme(rsa_overlay=True), selection, seed=5).ledger
    dtx, drx = rsa.tx_bits - plain.tx_bits, rsa.rx_bits - plain.rx_bits
    assert dtx % 1024 == 0 and drx % 1024 == 0
    assert rsa.sha1_bytes == plain.sha1_bytes and rsa.pointmuls == plain.pointmuls
    c = DEFAULT_CONSTANTS
    want = (c.c_tx * dtx + c.c_rx * drx) * 1e-6 + rsa.verifies * c.rsa1024_verify * 1e-3
    assert math.isclose(rsa.energy() - plain.energy(), want, rel_tol=1e-12)
    assert rsa.verifies == plain.pointmuls  # one verification per side per link


@pytest.mark.parametrize("seed", range(4))
def test_connectivity_equals_unsecured_configuration(seed):
    t = deploy(400, 8, seed)
    base = run_configuration(t, NoSecurity(), "proactive", seed=seed)
    for sel in ("proactive", "reactive"):
        o = run_configuration(t, ECDHScheme(), sel, seed=seed)
        assert o.configured_count == base.configured_count
