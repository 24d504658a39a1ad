"""Measurement-simulation tests: submatrix sampling, Pauli expectations, noise."""

import numpy as np
import pytest

from algqst.errors import InvalidStateError, ShapeError
from algqst.measure import (
    MeasurementRecord,
    NoiseSpec,
    ObservedSubmatrix,
    load_submatrix,
    pauli_expectations,
    random_pauli_set,
    sample_submatrices,
    save_record,
    save_submatrix,
)
from algqst.patterns import IndexSet, entry_observables, overlapping_block_pattern
from algqst.qcore import DensityMatrix, ginibre_random_state, pauli_observable

KET0 = DensityMatrix(2, np.diag([1.0, 0.0]).astype(complex))
MIXED2 = DensityMatrix(2, np.eye(2, dtype=complex) / 2)


class TestNoiseSpec:
    def test_defaults_to_noiseless(self):
        assert NoiseSpec().kind == "none"

    def test_rejects_unknown_kind(self):
        with pytest.raises(InvalidStateError):
            NoiseSpec(kind="poisson")

    def test_rejects_nonfinite_snr(self):
        with pytest.raises(InvalidStateError):
            NoiseSpec(kind="gaussian_snr", snr_db=float("nan"))

    def test_rejects_negative_scale(self):
        with pytest.raises(InvalidStateError):
            NoiseSpec(kind="gaussian_snr", scale=-0.1)


class TestObservedSubmatrix:
    def test_rejects_nonhermitian(self):
        bad = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
        with pytest.raises(InvalidStateError):
            ObservedSubmatrix(IndexSet((1, 2)), bad)

    def test_rejects_size_mismatch(self):
        with pytest.raises(ShapeError):
            ObservedSubmatrix(IndexSet((1, 2, 3)), np.eye(2, dtype=complex))


class TestSampleSubmatrices:
    def test_noiseless_is_bitwise_exact(self):
        rho = ginibre_random_state(8, 2, 5)
        pattern = overlapping_block_pattern(8, 2, 1)
        subs = sample_submatrices(rho, pattern, NoiseSpec())
        for block, sub in zip(pattern.blocks, subs):
            idx = block.zero_based()
            assert np.array_equal(sub.data, rho.data[np.ix_(idx, idx)])

    def test_noisy_outputs_hermitian(self):
        rho = ginibre_random_state(8, 2, 5)
        pattern = overlapping_block_pattern(8, 2, 2)
        noise = NoiseSpec("gaussian_snr", snr_db=10.0, seed=3)
        for sub in sample_submatrices(rho, pattern, noise):
            assert np.max(np.abs(sub.data - sub.data.conj().T)) <= 1e-12

    def test_deterministic_for_fixed_seed(self):
        rho = ginibre_random_state(8, 2, 5)
        pattern = overlapping_block_pattern(8, 2, 1)
        noise = NoiseSpec("gaussian_snr", snr_db=20.0, seed=9)
        a = sample_submatrices(rho, pattern, noise)
        b = sample_submatrices(rho, pattern, noise)
        for x, y in zip(a, b):
            assert np.array_equal(x.data, y.data)

    def test_pattern_dim_mismatch(self):
        rho = ginibre_random_state(4, 2, 0)
        pattern = overlapping_block_pattern(8, 2, 1)
        with pytest.raises(ShapeError):
            sample_submatrices(rho, pattern, NoiseSpec())

    def test_shared_cells_get_one_noise_draw(self):
        # overlapping blocks must agree on their common cells
        rho = ginibre_random_state(8, 2, 5)
        pattern = overlapping_block_pattern(8, 2, 1)
        noise = NoiseSpec("gaussian_snr", snr_db=20.0, seed=4)
        subs = sample_submatrices(rho, pattern, noise)
        first, second = subs[0], subs[1]
        shared = sorted(set(first.indices.indices) & set(second.indices.indices))
        for r in shared:
            for c in shared:
                a = first.data[first.indices.indices.index(r),
                               first.indices.indices.index(c)]
                b = second.data[second.indices.indices.index(r),
                                second.indices.indices.index(c)]
                assert a == b

    def test_snr_calibration(self):
        # empirical SNR of the stacked parameter vector within 30 +- 1 dB
        rho = ginibre_random_state(8, 2, 42)
        pattern = overlapping_block_pattern(8, 2, 1)
        clean = sample_submatrices(rho, pattern, NoiseSpec())

        def params(subs):
            vals = {}
            for sub in subs:
                idx = sub.indices.zero_based()
                for a in range(len(idx)):
                    for b in range(a, len(idx)):
                        vals[(idx[a], idx[b])] = sub.data[a, b]
            diag = np.array([v.real for (r, c), v in sorted(vals.items()) if r == c])
            off = np.array([v for (r, c), v in sorted(vals.items()) if r != c])
            return np.concatenate([diag, off.real, off.imag])

        base = params(clean)
        sig_power = np.mean(base**2)
        ratios = []
        for seed in range(1000):
            noisy = sample_submatrices(
                rho, pattern, NoiseSpec("gaussian_snr", snr_db=30.0, seed=seed))
            err = params(noisy) - base
            ratios.append(sig_power / np.mean(err**2))
        snr_db = 10 * np.log10(np.mean(ratios))
        assert 29.0 <= snr_db <= 31.0


class TestEntrywiseConsistency:
    def test_observable_view_matches_submatrix_view(self):
        rho = ginibre_random_state(8, 2, 17)
        pattern = overlapping_block_pattern(8, 2, 2)
        subs = sample_submatrices(rho, pattern, NoiseSpec())
        for sub in subs:
            rows = sub.indices.indices
            for a, r in enumerate(rows):
                for b, c in enumerate(rows):
                    obs = entry_observables(r, c, 8)
                    if r == c:
                        val = np.trace(rho.data @ obs[0].data)
                    else:
                        val = (np.trace(rho.data @ obs[0].data)
                               + 1j * np.trace(rho.data @ obs[1].data))
                    assert abs(val - sub.data[a, b]) <= 1e-14


class TestIsorank:
    def test_noiseless_blocks_inherit_rank(self):
        for seed in range(20):
            rho = ginibre_random_state(16, 3, seed)
            pattern = overlapping_block_pattern(16, 3, 2)
            for sub in sample_submatrices(rho, pattern, NoiseSpec()):
                w = np.abs(np.linalg.eigvalsh(sub.data))
                assert int(np.sum(w > 1e-10 * w.max())) == 3


class TestPauliExpectations:
    def test_identity_gives_unit_trace(self):
        rho = ginibre_random_state(4, 2, 3)
        rec = pauli_expectations(rho, [pauli_observable(["I", "I"])], NoiseSpec())
        assert rec.outcomes[0] == pytest.approx(1.0, abs=1e-14)

    def test_z_on_ground_state(self):
        rec = pauli_expectations(KET0, [pauli_observable(["Z"])], NoiseSpec())
        assert rec.outcomes[0] == pytest.approx(1.0, abs=1e-14)

    def test_x_on_maximally_mixed(self):
        rec = pauli_expectations(MIXED2, [pauli_observable(["X"])], NoiseSpec())
        assert rec.outcomes[0] == pytest.approx(0.0, abs=1e-14)

    def test_dimension_mismatch(self):
        rho = ginibre_random_state(4, 2, 3)
        with pytest.raises(ShapeError):
            pauli_expectations(rho, [pauli_observable(["Z"])], NoiseSpec())

    def test_noise_deterministic(self):
        rho = ginibre_random_state(4, 2, 3)
        obs = random_pauli_set(2, 20, 1)
        noise = NoiseSpec("gaussian_snr", snr_db=20.0, seed=5)
        a = pauli_expectations(rho, obs, noise)
        b = pauli_expectations(rho, obs, noise)
        assert np.array_equal(a.outcomes, b.outcomes)


class TestRandomPauliSet:
    def test_count_and_dims(self):
        obs = random_pauli_set(1, 4, 0)
        assert len(obs) == 4
        assert all(o.dim == 2 for o in obs)

    def test_deterministic(self):
        a = random_pauli_set(3, 10, 7)
        b = random_pauli_set(3, 10, 7)
        assert all(np.array_equal(x.data, y.data) for x, y in zip(a, b))

    def test_support(self):
        # every draw is one of the 16 two-qubit Pauli strings
        valid = set()
        for s1 in "IXYZ":
            for s2 in "IXYZ":
                valid.add(pauli_observable([s1, s2]).data.tobytes())
        for o in random_pauli_set(2, 1000, 3):
            assert o.data.tobytes() in valid

    def test_identity_admitted_at_most_once(self):
        eye = np.eye(4, dtype=complex).tobytes()
        for seed in range(30):
            obs = random_pauli_set(2, 40, seed)
            count = sum(1 for o in obs if o.data.tobytes() == eye)
            assert count <= 1


class TestMeasurementIO:
    def test_record_csv(self, tmp_path):
        rho = ginibre_random_state(4, 2, 3)
        rec = pauli_expectations(rho, random_pauli_set(2, 5, 1), NoiseSpec())
        path = tmp_path / "record.csv"
        save_record(rec, str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "observable_id,outcome"
        assert len(lines) == 6

    def test_submatrix_round_trip(self, tmp_path):
        rho = ginibre_random_state(8, 2, 5)
        pattern = overlapping_block_pattern(8, 2, 1)
        sub = sample_submatrices(rho, pattern, NoiseSpec())[2]
        path = tmp_path / "sub.json"
        save_submatrix(sub, str(path))
        back = load_submatrix(str(path))
        assert back.indices.indices == sub.indices.indices
        assert np.array_equal(back.data, sub.data)
