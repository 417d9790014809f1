"""Finite-difference validation of the hand-written backward pass."""

from __future__ import annotations

import numpy as np

from .model import TrainingExample, TranslationModel, loss_and_gradients, multi_target_loss

# Coordinates whose analytic and numeric gradients are both below this
# floor contribute round-off noise, not signal; the floor caps their
# relative error while still flagging absolute errors above ~1e-9.
_DENOMINATOR_FLOOR = 1e-5


def gradient_check_detailed(
    model: TranslationModel,
    example: TrainingExample,
    epsilon: float = 1e-5,
    max_coords: int = 200,
    seed: int = 0,
) -> dict[str, float]:
    """Max relative gradient error per parameter tensor.

    Central differences on a seeded sample of at most ``max_coords``
    coordinates per tensor, against the analytic gradient.  Requires
    float64 parameters.
    """
    if max_coords < 1:
        raise ValueError("max_coords must be >= 1")
    if any(t.dtype != np.float64 for t in model.params.values()):
        raise ValueError("gradient_check requires float64 parameters")
    _, analytic = loss_and_gradients(model, example)
    rng = np.random.default_rng(seed)
    errors: dict[str, float] = {}
    for name in model.params:
        tensor = model.params[name]
        flat = tensor.reshape(-1)
        n = flat.shape[0]
        count = min(max_coords, n)
        coords = rng.choice(n, size=count, replace=False)
        grad_flat = analytic[name].reshape(-1)
        worst = 0.0
        for idx in coords:
            original = flat[idx]
            flat[idx] = original + epsilon
            plus = multi_target_loss(model, example)
            flat[idx] = original - epsilon
            minus = multi_target_loss(model, example)
            flat[idx] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            a = grad_flat[idx]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), _DENOMINATOR_FLOOR)
            if rel > worst:
                worst = rel
        errors[name] = worst
    return errors


def gradient_check(
    model: TranslationModel,
    example: TrainingExample,
    epsilon: float = 1e-5,
    max_coords: int = 200,
    seed: int = 0,
) -> float:
    """Max relative gradient error over all parameter tensors."""
    per_tensor = gradient_check_detailed(
        model, example, epsilon=epsilon, max_coords=max_coords, seed=seed
    )
    return max(per_tensor.values())
