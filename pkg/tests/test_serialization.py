import json

import numpy as np
import pytest

from crdf import (
    CausalKernelChain,
    DistortionModel,
    FinitePmf,
    SourceModel,
    solve_fixed_s,
    sweep,
)
from crdf.sampling import random_chain
from crdf.serialization import (
    CSV_HEADER,
    ConfigError,
    chain_from_dict,
    chain_to_dict,
    curve_to_csv,
    distortion_from_dict,
    distortion_to_dict,
    general_kernel_from_dict,
    general_kernel_to_dict,
    output_from_dict,
    output_to_dict,
    point_to_dict,
    source_from_dict,
    source_to_dict,
)


class TestSourceRoundTrip:
    def test_iid(self):
        src = SourceModel.iid(FinitePmf([0.3, 0.7]), 2)
        back = source_from_dict(source_to_dict(src))
        assert back.kind == "iid" and back.horizon == 2
        assert np.allclose(back.joint_pmf(), src.joint_pmf())

    def test_markov(self):
        T = np.array([[0.9, 0.1], [0.2, 0.8]])
        src = SourceModel.markov(FinitePmf([0.6, 0.4]), T, 1)
        back = source_from_dict(source_to_dict(src))
        assert back.kind == "markov"
        assert np.allclose(back.joint_pmf(), src.joint_pmf())

    def test_explicit(self):
        w = np.array([0.1, 0.2, 0.3, 0.4])
        src = SourceModel.explicit(w, 2, 1)
        back = source_from_dict(source_to_dict(src))
        assert np.allclose(back.joint_pmf(), w)

    def test_json_safe(self):
        src = SourceModel.iid(FinitePmf([0.25, 0.75]), 1)
        d = json.loads(json.dumps(source_to_dict(src)))
        assert np.allclose(source_from_dict(d).joint_pmf(), src.joint_pmf())

    def test_missing_field_names_location(self):
        with pytest.raises(ConfigError, match="source.letter"):
            source_from_dict({"kind": "iid", "horizon": 1})

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="kind"):
            source_from_dict({"kind": "gaussian", "horizon": 0})

    def test_invalid_pmf_wrapped_as_config_error(self):
        with pytest.raises(ConfigError):
            source_from_dict({"kind": "iid", "horizon": 0, "letter": [0.5, 0.6]})


class TestDistortionRoundTrip:
    def test_single_letter(self):
        dist = DistortionModel.hamming(3, 2)
        back = distortion_from_dict(distortion_to_dict(dist))
        assert np.array_equal(back.total_cost_matrix(3, 3),
                              dist.total_cost_matrix(3, 3))

    def test_tables(self):
        t0 = np.array([[0.0, 1.0], [1.0, 0.0]])
        t1 = np.arange(16, dtype=float).reshape(4, 4)
        dist = DistortionModel.from_tables([t0, t1], 1)
        back = distortion_from_dict(distortion_to_dict(dist))
        assert np.array_equal(back.total_cost_matrix(2, 2),
                              dist.total_cost_matrix(2, 2))

    def test_hamming_shorthand_needs_alphabet(self):
        d = {"kind": "hamming", "horizon": 1}
        with pytest.raises(ConfigError, match="nx"):
            distortion_from_dict(d)
        dist = distortion_from_dict(d, nx=2)
        assert np.array_equal(dist.letter_costs, 1.0 - np.eye(2))


class TestKernelRoundTrip:
    def test_memoryless_chain(self):
        W = np.array([[0.9, 0.1], [0.3, 0.7]])
        chain = CausalKernelChain.memoryless(W, 2)
        back = chain_from_dict(chain_to_dict(chain))
        assert back.is_memoryless
        assert np.allclose(back.conditional_matrix(),
                           chain.conditional_matrix())

    def test_staged_chain(self):
        rng = np.random.default_rng(5)
        chain = random_chain(rng, 2, 3, 2)
        back = chain_from_dict(json.loads(json.dumps(chain_to_dict(chain))))
        assert np.allclose(back.conditional_matrix(),
                           chain.conditional_matrix(), atol=1e-15)

    def test_general_kernel(self):
        rng = np.random.default_rng(6)
        gen = random_chain(rng, 2, 2, 1).to_general()
        back = general_kernel_from_dict(general_kernel_to_dict(gen))
        assert np.allclose(back.table, gen.table, atol=1e-15)

    def test_unknown_chain_kind(self):
        with pytest.raises(ConfigError):
            chain_from_dict({"kind": "recurrent"})


class TestOutputRoundTrip:
    def test_memoryless(self):
        from crdf.probability import OutputProcess
        out = OutputProcess.memoryless(np.array([0.4, 0.6]), 2)
        back = output_from_dict(output_to_dict(out))
        assert back.is_memoryless
        assert np.allclose(back.joint_pmf(), out.joint_pmf())

    def test_explicit(self):
        src = SourceModel.iid(FinitePmf([0.3, 0.7]), 1)
        p = solve_fixed_s(src, DistortionModel.hamming(2, 1), -1.0)
        back = output_from_dict(output_to_dict(p.output))
        assert np.allclose(back.joint_pmf(), p.output.joint_pmf(), atol=1e-12)


class TestResults:
    def test_point_dict_carries_solution(self):
        src = SourceModel.iid(FinitePmf([0.4, 0.6]), 1)
        p = solve_fixed_s(src, DistortionModel.hamming(2, 1), -2.0)
        d = point_to_dict(p)
        assert d["s"] == -2.0 and d["converged"]
        assert np.allclose(chain_from_dict(d["chain"]).conditional_matrix(),
                           p.chain.conditional_matrix())
        slim = point_to_dict(p, include_kernels=False)
        assert "chain" not in slim and "output" not in slim

    def test_curve_csv_format(self):
        src = SourceModel.iid(FinitePmf.uniform(2), 1)
        curve = sweep(src, DistortionModel.hamming(2, 1), [0.0, -1.0, -3.0])
        text = curve_to_csv(curve)
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 4
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert first[5] in ("true", "false")
        assert curve_to_csv(curve) == text   # byte-stable per input
