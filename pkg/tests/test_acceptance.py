"""Exit criteria. Each test carries a ``criterion`` marker; the terminal
summary prints one PASS/FAIL/SKIP line per criterion."""

import os
import time

import numpy as np
import pytest

from qlingam.cli import main, run_table1
from qlingam.dataset import (
    UCI_HEART_COLUMNS,
    MissingPolicy,
    SyntheticSpec,
    gen_synthetic,
    load_csv,
    synthetic_adjacency,
)
from qlingam.errors import HeaderMissing
from qlingam.independence import nocco
from qlingam.kernels import KernelConfig, center_gram, gram
from qlingam.lingam import DiscoveryConfig, discover, estimate_strengths, prune, regress_residual
from qlingam.quantum import (
    IqpCircuitSpec,
    ReadoutNoiseModel,
    build_calibration_matrix,
    build_iqp_state,
    kernel_exact,
    kernel_inner_product,
    kernel_shots,
)

from . import oracles

pytestmark = pytest.mark.acceptance


def criterion(number, title):
    return pytest.mark.criterion(number, title)


@criterion(1, "closed-form 1-qubit kernel oracle, 1000 pairs < 1e-12, < 1 s")
def test_closed_form_kernel():
    rng = np.random.default_rng(1)
    spec = IqpCircuitSpec(1, 1)
    pairs = rng.uniform(-2 * np.pi, 2 * np.pi, size=(1000, 2))
    t0 = time.perf_counter()
    got = np.array([kernel_exact(a, b, spec) for a, b in pairs])
    elapsed = time.perf_counter() - t0
    expected = np.array([oracles.kernel_one_qubit(a, b) for a, b in pairs])
    assert np.max(np.abs(got - expected)) < 1e-12
    assert elapsed < 1.0


@criterion(2, "inversion test == inner product within 1e-12, 200 configs, < 10 s")
def test_dual_path_equivalence():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        spec = IqpCircuitSpec(int(rng.integers(1, 7)), int(rng.integers(1, 3)))
        a, b = rng.uniform(-4, 4, size=2)
        worst = max(worst, abs(kernel_exact(a, b, spec) - kernel_inner_product(a, b, spec)))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-12
    assert elapsed < 10.0


@criterion(3, "property suites on randomized inputs")
class TestProperties:
    rng = np.random.default_rng(3)

    def test_gram_symmetry_unit_diagonal_psd(self):
        for kind in ("quantum", "gaussian"):
            for _ in range(10):
                x = self.rng.laplace(size=int(self.rng.integers(5, 60)))
                K = gram(x, KernelConfig(kind)).entries
                assert np.max(np.abs(K - K.T)) <= 1e-9
                assert np.max(np.abs(np.diag(K) - 1)) <= 1e-9
                assert np.linalg.eigvalsh(K)[0] >= -1e-8

    def test_statevector_unit_norm(self):
        for _ in range(100):
            spec = IqpCircuitSpec(int(self.rng.integers(1, 7)), int(self.rng.integers(1, 3)))
            assert abs(build_iqp_state(self.rng.uniform(-5, 5), spec).norm() - 1) < 1e-10

    def test_nocco_nonnegative_symmetric(self):
        for kind in ("quantum", "gaussian"):
            for _ in range(10):
                x = self.rng.laplace(size=40)
                y = self.rng.uniform(-1, 1) * x + self.rng.laplace(size=40)
                a, b = nocco(x, y, KernelConfig(kind)), nocco(y, x, KernelConfig(kind))
                assert a >= 0 and abs(a - b) < 1e-8

    def test_centered_gram_zero_sums(self):
        for _ in range(20):
            G = center_gram(gram(self.rng.normal(size=30), KernelConfig())).entries
            assert np.max(np.abs(G.sum(axis=0))) < 1e-8
            assert np.max(np.abs(G.sum(axis=1))) < 1e-8

    def test_calibration_column_stochastic(self):
        for q in (1, 2, 3, 4):
            noise = ReadoutNoiseModel(*self.rng.uniform(0, 0.2, size=2))
            cal = build_calibration_matrix(q, noise, 1000, int(self.rng.integers(2**32)))
            assert np.max(np.abs(cal.entries.sum(axis=0) - 1)) < 1e-9
            assert cal.entries.min() >= 0 and cal.entries.max() <= 1

    def test_ols_residual_orthogonality(self):
        for _ in range(100):
            xi, xj = self.rng.laplace(size=(2, 50))
            r = regress_residual(xi + self.rng.normal() * xj, xj)
            assert abs(np.mean((r - r.mean()) * (xj - xj.mean()))) < 1e-8

    def test_strict_lower_triangular_under_ordering(self):
        for _ in range(20):
            p = int(self.rng.integers(2, 6))
            X = self.rng.laplace(size=(p, 80))
            K = [int(v) for v in self.rng.permutation(p)]
            B = estimate_strengths(X, K)
            assert np.all(np.triu(B[np.ix_(K, K)]) == 0)


@criterion(4, "noiseless shot kernel within 5 sigma + 0.005 at q=5 d=2, 50 pairs, < 1 min")
def test_shot_convergence():
    rng = np.random.default_rng(4)
    spec = IqpCircuitSpec(5, 2)
    shots = 100_000
    t0 = time.perf_counter()
    for k, (a, b) in enumerate(rng.uniform(-3, 3, size=(50, 2))):
        exact = kernel_exact(a, b, spec)
        est = kernel_shots(a, b, spec, shots, seed=k)
        assert abs(est - exact) <= 5 * np.sqrt(exact * (1 - exact) / shots) + 0.005
    assert time.perf_counter() - t0 < 60


@criterion(5, "readout mitigation lowers mean |Gram error| at q=4 d=1, p=0.02, < 5 min")
def test_mitigation_efficacy():
    t0 = time.perf_counter()
    series = gen_synthetic(SyntheticSpec(30, 5)).values[0]
    spec = IqpCircuitSpec(4, 1)
    noise = ReadoutNoiseModel(0.02, 0.02)
    exact = gram(series, KernelConfig("quantum", spec)).entries
    noisy_cfg = KernelConfig("quantum", spec, mode="shots", shots=8192, noise=noise)
    mitigated_cfg = noisy_cfg.with_calibration(100_000, seed=55)
    noisy = gram(series, noisy_cfg, seed=7).entries
    mitigated = gram(series, mitigated_cfg, seed=7).entries
    err_noisy = np.mean(np.abs(noisy - exact))
    err_mitigated = np.mean(np.abs(mitigated - exact))
    print(f"mean |error|: unmitigated {err_noisy:.5f}, mitigated {err_mitigated:.5f}")
    assert err_mitigated < err_noisy
    assert time.perf_counter() - t0 < 300


@pytest.fixture(scope="module")
def table1_report():
    cfgs = {
        "quantum": DiscoveryConfig(kernel=KernelConfig("quantum", IqpCircuitSpec(5, 2))),
        "gaussian": DiscoveryConfig(kernel=KernelConfig("gaussian")),
    }
    t0 = time.perf_counter()
    report = run_table1(datasets=100, n=100, seed_base=0, cfgs=cfgs)
    report["elapsed"] = time.perf_counter() - t0
    return report


@criterion(6, "benchmark counts: gaussian in [33, 63], quantum in [38, 68], ordering >= structure, < 30 min")
def test_table1_reproduction(table1_report):
    r = table1_report
    t = r["totals"]
    print(f"counts {r['counts']}  totals {t}  ({r['elapsed']:.0f} s)")
    assert r["completed"] == 100
    assert 33 <= t["gaussian"]["structure_correct"] <= 63
    assert 38 <= t["quantum"]["structure_correct"] <= 68
    for name in ("quantum", "gaussian"):
        assert t[name]["ordering_correct"] >= t[name]["structure_correct"]
    assert sum(r["counts"].values()) == 100
    assert r["elapsed"] < 30 * 60


@criterion(7, "n=1e5 strengths within 0.02 of 0.3 and prune(0.1) gives the true edges, < 1 min")
def test_large_n_sanity():
    t0 = time.perf_counter()
    data = gen_synthetic(SyntheticSpec(100_000, 1))
    B = estimate_strengths(data, [0, 1, 2])
    for i, j in [(1, 0), (2, 1), (2, 0)]:
        assert abs(B[i, j] - 0.3) <= 0.02
    np.testing.assert_array_equal(prune(B, data, 0.1), synthetic_adjacency())
    assert time.perf_counter() - t0 < 60


def _medical(env, policy, names, fallback_columns=None):
    path = os.environ.get(env)
    if not path:
        pytest.skip(f"set {env} to a local copy of the dataset to run this check")
    try:
        return load_csv(path, policy, names)
    except HeaderMissing:
        if fallback_columns is None:
            raise
        return load_csv(path, policy, names, column_names=fallback_columns)


def _edges(model):
    return {(model.variables[c].lower(), model.variables[e].lower()) for c, e in model.edges()}


@criterion(8, "medical-data qualitative outcomes (documentation only; needs local files)")
class TestMedical:
    # Outcomes are printed, not asserted: subsample rows and hyperparameters are unknown.

    def test_heart_exang_to_cp(self):
        dm = _medical("QLINGAM_HEART_CSV", MissingPolicy(["?"], []), ["age", "cp", "exang"],
                      UCI_HEART_COLUMNS)
        edges = _edges(discover(dm, DiscoveryConfig()))
        print(f"heart n={dm.n}: edges {sorted(edges)}; exang->cp present: {('exang', 'cp') in edges}")

    def test_pima_paths(self):
        dm = _medical("QLINGAM_PIMA_CSV", MissingPolicy([], ["insulin", "glucose"]),
                      ["age", "insulin", "glucose"])
        edges = _edges(discover(dm, DiscoveryConfig()))
        expected = {("age", "insulin"), ("insulin", "glucose"), ("age", "glucose")}
        print(f"pima n={dm.n}: edges {sorted(edges)}; matches reference: {edges == expected}")


@criterion(9, "every CLI command is byte-identical across repeated runs")
def test_cli_determinism(tmp_path):
    def twice(argv_for):
        outs = []
        for tag in ("a", "b"):
            paths = argv_for(tag)
            assert main(paths["argv"]) == 0
            outs.append([open(p, "rb").read() for p in paths["outputs"]])
        assert outs[0] == outs[1]

    src = str(tmp_path / "src.csv")
    assert main(["gen", "--n", "40", "--seed", "3", "--out", src]) == 0

    def gen(tag):
        out = str(tmp_path / f"gen_{tag}.csv")
        return {"argv": ["gen", "--n", "40", "--seed", "3", "--out", out], "outputs": [out]}

    def prep(tag):
        out = str(tmp_path / f"prep_{tag}.csv")
        return {"argv": ["prep", "--input", src, "--subsample", "25", "--seed", "8", "--out", out],
                "outputs": [out]}

    def disc(tag):
        out, dot = str(tmp_path / f"m_{tag}.json"), str(tmp_path / f"m_{tag}.dot")
        return {"argv": ["discover", "--input", src, "--noise", "0.02", "--mitigate", "--shots", "1024",
                         "--cal-shots", "5000", "--seed", "11", "--out", out, "--dot", dot],
                "outputs": [out, dot]}

    def gram_(tag):
        out, side = str(tmp_path / f"g_{tag}.csv"), str(tmp_path / f"g_{tag}.json")
        return {"argv": ["gram", "--input", src, "--var", "x2", "--noise", "0.02", "--mitigate",
                         "--seed", "5", "--out", out, "--sidecar", side],
                "outputs": [out, side]}

    def table(tag):
        out = str(tmp_path / f"t_{tag}.json")
        return {"argv": ["table1", "--datasets", "3", "--n", "40", "--seed-base", "2", "--out", out],
                "outputs": [out]}

    for command in (gen, prep, disc, gram_, table):
        twice(command)
