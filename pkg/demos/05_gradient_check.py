"""Verify the from-scratch backpropagation against finite differences.

Every gradient the trainer uses comes from the package's own reverse-mode
autodiff. The standard way to trust such an engine is a central
finite-difference check: nudge each parameter entry by +/-eps, rebuild the
loss, and compare the slope against the recorded gradient. This script
runs that check over every parameter block of a full two-encoder model,
then shows the same machinery on a single operation.
"""

import numpy as np

from claimscreen.autodiff import Tensor, cross_entropy, grad_check, matmul, tanh_act
from claimscreen.embed import ClaimMatrix
from claimscreen.model import ModelConfig, init_params, model_forward


def main() -> None:
    # --- whole model: loss of one padded patent, every block checked ---
    config = ModelConfig(d_e=8, m=4, n_encoders=2, dropout=0.0, init_seed=0)
    params = init_params(config, dtype=np.float64)  # float64 for tight eps
    rng = np.random.default_rng(7)
    data = np.zeros((4, 8))
    data[:3] = rng.normal(scale=0.8, size=(3, 8))   # 3 claims + 1 pad row
    matrix = ClaimMatrix(data, active_count=3)

    def loss():
        logits, _ = model_forward(matrix, params)
        return cross_entropy(logits, np.array([0]))

    report = grad_check(loss, params.named_parameters())
    print(f"Full model: {len(report.block_errors)} parameter blocks, "
          f"eps={report.eps:g}, tolerance={report.tolerance:g}")
    worst = sorted(report.block_errors.items(), key=lambda kv: -kv[1])[:5]
    print("Largest relative errors:")
    for name, err in worst:
        print(f"  {name:<18} {err:.3e}")
    verdict = "OK" if not report.failed_blocks else f"FAILED: {report.failed_blocks}"
    print(f"max relative error {report.max_rel_err:.3e} -> {verdict}\n")

    # --- the same check on a hand-built graph ---
    w = Tensor(rng.normal(size=(3, 2)))
    x = Tensor(rng.normal(size=(2, 3)))

    def toy():
        return cross_entropy(tanh_act(matmul(x, w)), np.array([1, 0]))

    toy_report = grad_check(toy, [("w", w), ("x", x)])
    print("Toy graph tanh(x @ w):")
    for name, err in toy_report.block_errors.items():
        print(f"  {name}: relative error {err:.3e}")


if __name__ == "__main__":
    main()
