import numpy as np
import pytest

from backend.core.errors import KindMismatch, NotUnilateral
from backend.core.linalg import rel_fro
from backend.harness.sweep import run_equivalence_check
from backend.models import (
    ArchitectureFamily,
    ArchitectureSpec,
    ChannelBlocks,
    Fidelity,
    NetworkMatrix,
    OpenCircuit,
    ParameterKind,
    PortPartition,
    TerminationSet,
)
from backend.ris_service.architectures import random_feasible, termination_matrix
from backend.ris_service.channel import (
    build_channel,
    general_channel,
    map_matched,
    map_unilateral,
    matched_channel,
    neumann_srt,
    source_referred_channel,
    unilateral_channel,
    widely_used_from_z,
)
from backend.ris_service.framework import problem_from_network, solve_general
from backend.ris_service.netparams import convert, random_passive_network

from conftest import Z0, complex_normal, make_unilateral, random_z_blocks


def _fully(n_i=4, seed=5):
    return random_feasible(ArchitectureSpec(family=ArchitectureFamily.FULLY, n_i=n_i), seed, z0=Z0)


def test_general_channel_is_kind_independent():
    report = run_equivalence_check(seed=3, fixtures=25)
    assert report.fixtures == 25
    assert report.passed, report.max_deviation


def test_general_channel_rejects_wrong_kind(fixture_pair):
    net, terms = fixture_pair
    with pytest.raises(KindMismatch):
        general_channel(ParameterKind.S, net, terms)


def test_unilateral_channel_equals_general_on_unilateral_network(fixture_pair):
    net, terms = fixture_pair
    for kind in ParameterKind:
        converted = make_unilateral(convert(net, kind))
        h_uni = unilateral_channel(kind, converted, terms)
        assert h_uni.fidelity == Fidelity.UNILATERAL
        assert rel_fro(h_uni.h, general_channel(kind, converted, terms).h) < 1e-9


def test_unilateral_channel_with_open_ris(fixture_pair):
    net, terms = fixture_pair
    uni = make_unilateral(net)
    opened = TerminationSet(z_t=terms.z_t, z_i=OpenCircuit(size=2), z_r=terms.z_r, z0=Z0)
    assert rel_fro(unilateral_channel(ParameterKind.Z, uni, opened).h,
                   general_channel(ParameterKind.Z, uni, opened).h) < 1e-9


def test_unilateral_channel_rejects_feedback(fixture_pair):
    net, terms = fixture_pair
    with pytest.raises(NotUnilateral):
        unilateral_channel(ParameterKind.Z, net, terms)


def _matched_unilateral_network(seed, n_t=2, n_i=3, n_r=2):
    """Unilateral Z with matched antennas and a passive coupled RIS."""
    rng = np.random.default_rng(seed)
    x = rng.normal(scale=Z0, size=(n_i, n_i))
    z_ii = Z0 * np.eye(n_i) + 0.2j * (x + x.T)
    blocks = {
        "TT": Z0 * np.eye(n_t),
        "RR": Z0 * np.eye(n_r),
        "II": z_ii,
        "RT": complex_normal(rng, (n_r, n_t), Z0),
        "RI": complex_normal(rng, (n_r, n_i), Z0),
        "IT": complex_normal(rng, (n_i, n_t), Z0),
    }
    partition = PortPartition(n_t=n_t, n_i=n_i, n_r=n_r)
    return NetworkMatrix.from_blocks(ParameterKind.Z, blocks, partition, Z0), blocks


@pytest.mark.parametrize("seed", range(5))
def test_unilateral_with_matched_antennas_reduces_to_matched(seed):
    net, blocks = _matched_unilateral_network(seed=21 + seed)
    ris = _fully(n_i=3, seed=8 + seed)
    z_i = termination_matrix(ris, ParameterKind.Z)
    terms = TerminationSet(z_t=Z0 * np.eye(2), z_i=z_i, z_r=Z0 * np.eye(2), z0=Z0)
    cb = ChannelBlocks(kind=ParameterKind.Z, rt=blocks["RT"], ri=blocks["RI"], it=blocks["IT"], z0=Z0)

    coupled = matched_channel(ParameterKind.Z, cb, ris, ris_coupling=blocks["II"])
    assert coupled.fidelity == Fidelity.MATCHED_WITH_RIS_COUPLING
    assert rel_fro(coupled.h, unilateral_channel(ParameterKind.Z, net, terms).h) < 1e-9
    assert rel_fro(coupled.h, general_channel(ParameterKind.Z, net, terms).h) < 1e-9


def test_matched_equals_coupled_model_with_diagonal_self_impedance():
    cb = random_z_blocks(seed=4)
    ris = _fully()
    plain = matched_channel(ParameterKind.Z, cb, ris)
    assert plain.fidelity == Fidelity.MATCHED
    coupled = matched_channel(ParameterKind.Z, cb, ris, ris_coupling=Z0 * np.eye(4))
    assert rel_fro(plain.h, coupled.h) < 1e-12


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("family", [ArchitectureFamily.SINGLE, ArchitectureFamily.FULLY])
def test_mapped_blocks_give_the_same_matched_channel(family, seed):
    cb = random_z_blocks(seed=9 + seed)
    ris = random_feasible(ArchitectureSpec(family=family, n_i=4), seed=2, z0=Z0)
    mapping = map_matched(cb)
    h_z = matched_channel(ParameterKind.Z, cb, ris).h
    assert rel_fro(matched_channel(ParameterKind.Y, mapping.y, ris).h, h_z) < 1e-9
    assert rel_fro(matched_channel(ParameterKind.S, mapping.s, ris).h, h_z) < 1e-9


def test_mapped_blocks_keep_ris_coupling():
    rng = np.random.default_rng(17)
    x = rng.normal(scale=Z0, size=(4, 4))
    cb = random_z_blocks(seed=10, ii=Z0 * np.eye(4) + 0.1j * (x + x.T))
    ris = _fully(seed=3)
    mapping = map_matched(cb)
    h_z = matched_channel(ParameterKind.Z, cb, ris, cb.ii).h
    assert rel_fro(matched_channel(ParameterKind.Y, mapping.y, ris, mapping.y.ii).h, h_z) < 1e-9
    assert rel_fro(matched_channel(ParameterKind.S, mapping.s, ris, mapping.s.ii).h, h_z) < 1e-9


def test_matched_channel_open_ris_leaves_direct_path():
    cb = random_z_blocks(seed=12)
    h = matched_channel(ParameterKind.Z, cb, OpenCircuit(size=4)).h
    assert np.allclose(h, np.asarray(cb.rt) / (2 * Z0))


def test_unilateral_mapping_matches_full_conversion(fixture_pair):
    net, _ = fixture_pair
    uni = make_unilateral(net)
    mapping = map_unilateral(uni)
    for kind, mapped in ((ParameterKind.Y, mapping.y), (ParameterKind.S, mapping.s)):
        full = convert(uni, kind)
        for name in ("rt", "ri", "it", "ii"):
            assert rel_fro(getattr(mapped, name), full.block(name.upper())) < 1e-9


def test_widely_used_model_is_exact_for_matched_antennas():
    cb = random_z_blocks(seed=14)
    ris = _fully(seed=6)
    theta = termination_matrix(ris, ParameterKind.S)
    wide = widely_used_from_z(cb, theta)
    assert wide.fidelity == Fidelity.WIDELY_USED
    assert rel_fro(wide.h, matched_channel(ParameterKind.Z, cb, ris).h) < 1e-9


def test_neumann_model_drops_the_structural_term():
    cb = random_z_blocks(seed=15)
    theta = termination_matrix(_fully(seed=7), ParameterKind.S)
    approx = widely_used_from_z(cb, theta, neumann=True)
    assert approx.fidelity == Fidelity.WIDELY_USED_NEUMANN
    expected = neumann_srt(cb.rt, Z0) + (np.asarray(cb.ri) / (2 * Z0)) @ theta @ (np.asarray(cb.it) / (2 * Z0))
    assert rel_fro(approx.h, expected) < 1e-12


def test_source_referred_channel_maps_source_voltages(fixture_pair):
    net, terms = fixture_pair
    v_s = np.array([0.7, 1j])
    sol = solve_general(problem_from_network(net, terms, v_s))
    v_r = sol.x[net.partition.slices()["R"]]
    assert rel_fro(source_referred_channel(net, terms) @ v_s, v_r) < 1e-9


def test_build_channel_dispatch(fixture_pair):
    net, terms = fixture_pair
    general = build_channel(Fidelity.GENERAL, net=net, terms=terms)
    assert rel_fro(general.h, general_channel(ParameterKind.Z, net, terms).h) == 0

    cb = random_z_blocks(seed=16, ii=Z0 * np.eye(4))
    ris = _fully()
    coupled = build_channel(Fidelity.MATCHED_WITH_RIS_COUPLING, blocks=cb, ris=ris)
    assert coupled.fidelity == Fidelity.MATCHED_WITH_RIS_COUPLING

    plain = random_z_blocks(seed=16)
    with pytest.raises(ValueError):
        build_channel(Fidelity.MATCHED_WITH_RIS_COUPLING, blocks=plain, ris=ris)
    with pytest.raises(KindMismatch):
        build_channel(Fidelity.WIDELY_USED_NEUMANN, blocks=map_matched(plain).s, ris=ris)


def test_channel_matrix_refuses_non_finite_values():
    from backend.models import ChannelMatrix
    with pytest.raises(ValueError):
        ChannelMatrix(h=np.array([[np.nan]]), fidelity=Fidelity.GENERAL)


def test_larger_partition_equivalence():
    partition = PortPartition(n_t=3, n_i=8, n_r=2)
    report = run_equivalence_check(seed=8, fixtures=5, partition=partition)
    assert report.passed
    assert random_passive_network(partition, 1).values.shape == (13, 13)
