"""Least-squares adversarial, cycle-consistency, and identity-mapping losses."""

from __future__ import annotations

from prosodia.errors import ValidationError
from prosodia.nn.tensor import Tensor, add, add_const, l1_distance, mean, square

GENERATOR_SIDE = "generator"
DISCRIMINATOR_SIDE = "discriminator"


def adversarial_loss(d_scores_real, d_scores_fake: Tensor, side: str) -> Tensor:
    """Least-squares objective over patch scores.

    Discriminator side: mean((real - 1)^2) + mean(fake^2). Generator side:
    mean((fake - 1)^2); real scores are unused and may be None.
    """
    if side == DISCRIMINATOR_SIDE:
        if d_scores_real is None:
            raise ValidationError("discriminator side requires real scores")
        return add(
            mean(square(add_const(d_scores_real, -1.0))),
            mean(square(d_scores_fake)),
        )
    if side == GENERATOR_SIDE:
        return mean(square(add_const(d_scores_fake, -1.0)))
    raise ValidationError(f"side must be 'generator' or 'discriminator', got {side!r}")


def cycle_loss(x: Tensor, x_cycled: Tensor, y: Tensor, y_cycled: Tensor) -> Tensor:
    """Mean-absolute round-trip error, summed over both directions."""
    return add(l1_distance(x_cycled, x), l1_distance(y_cycled, y))


def identity_loss(x: Tensor, g_yx_of_x: Tensor, y: Tensor, g_xy_of_y: Tensor) -> Tensor:
    """Penalty on generators altering inputs already in their output domain."""
    return add(l1_distance(g_yx_of_x, x), l1_distance(g_xy_of_y, y))
