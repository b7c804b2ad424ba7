"""Building blocks of the policy network, composed from the differentiable primitives."""

import math
from typing import Optional

import torch
import torch.nn as nn

from waypointnav.modules.policy.autodiff import add, concat, matmul, mul, relu, sigmoid, softmax, sub, tanh

# additive score for masked-out keys; exp() of it underflows to exactly 0
MASKED_SCORE = -1e30


def attention(
    keys: torch.Tensor,
    query: torch.Tensor,
    values: Optional[torch.Tensor] = None,
    mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Scaled dot-product attention, softmax(keys·query/√d)·values, batched over any leading dimensions.

    Args:
        keys: Shape (..., n, d).
        query: Shape (..., d).
        values: Shape (..., n, d_v), defaults to `keys`.
        mask: Boolean shape (..., n), False for keys to ignore; every row must keep at least one key.

    Returns:
        The attended values, shape (..., d_v).

    Raises:
        ValueError: If there are no keys or the dimensions do not match.
    """
    values = keys if values is None else values
    if keys.dim() < 2 or keys.shape[-2] == 0:
        raise ValueError(f"attention: empty key set of shape {tuple(keys.shape)}")
    if keys.shape[-1] != query.shape[-1]:
        raise ValueError(f"attention: key dimension {keys.shape[-1]} does not match query dimension {query.shape[-1]}")
    if values.shape[-2] != keys.shape[-2]:
        raise ValueError(f"attention: {keys.shape[-2]} keys but {values.shape[-2]} values")
    scale = torch.tensor(1.0 / math.sqrt(keys.shape[-1]), dtype=keys.dtype)
    scores = mul(matmul(keys, query.unsqueeze(-1)).squeeze(-1), scale)
    if mask is not None:
        scores = add(scores, torch.zeros(mask.shape, dtype=scores.dtype).masked_fill(~mask, MASKED_SCORE))
    weights = softmax(scores, dim=-1)
    return matmul(weights.unsqueeze(-2), values).squeeze(-2)


def gru_cell(
    x: torch.Tensor,
    h: torch.Tensor,
    weight_ih: torch.Tensor,
    weight_hh: torch.Tensor,
    bias_ih: torch.Tensor,
    bias_hh: torch.Tensor,
) -> torch.Tensor:
    """
    One gated recurrent unit update with the reset, update and candidate blocks stacked along the weights' last
    dimension:

        r = σ(x·W_ir + b_ir + h·W_hr + b_hr)
        z = σ(x·W_iz + b_iz + h·W_hz + b_hz)
        n = tanh(x·W_in + b_in + r ⊙ (h·W_hn + b_hn))
        h' = (1 − z) ⊙ n + z ⊙ h

    Args:
        x: Input of shape (..., input_dim).
        h: Hidden state of shape (..., hidden_dim).
        weight_ih: Shape (input_dim, 3·hidden_dim).
        weight_hh: Shape (hidden_dim, 3·hidden_dim).
        bias_ih: Shape (3·hidden_dim,).
        bias_hh: Shape (3·hidden_dim,).

    Raises:
        ValueError: If the dimensions do not match.
    """
    hidden = h.shape[-1]
    if weight_hh.shape != (hidden, 3 * hidden) or weight_ih.shape[-1] != 3 * hidden:
        raise ValueError(
            f"gru_cell: weights {tuple(weight_ih.shape)}, {tuple(weight_hh.shape)} do not fit hidden size {hidden}"
        )
    if x.shape[-1] != weight_ih.shape[0]:
        raise ValueError(f"gru_cell: input dimension {x.shape[-1]} does not match weights {tuple(weight_ih.shape)}")
    gi = add(matmul(x, weight_ih), bias_ih)
    gh = add(matmul(h, weight_hh), bias_hh)
    i_r, i_z, i_n = gi.split(hidden, dim=-1)
    h_r, h_z, h_n = gh.split(hidden, dim=-1)
    r = sigmoid(add(i_r, h_r))
    z = sigmoid(add(i_z, h_z))
    n = tanh(add(i_n, mul(r, h_n)))
    return add(mul(sub(torch.ones_like(z), z), n), mul(z, h))


class Linear(nn.Module):
    """An affine map x·W + b with W stored as (in_features, out_features)."""

    def __init__(self, in_features: int, out_features: int, bias: bool = True) -> None:
        super().__init__()
        bound = 1.0 / math.sqrt(in_features)
        self.weight = nn.Parameter(torch.empty(in_features, out_features, dtype=torch.float64).uniform_(-bound, bound))
        self.bias = (
            nn.Parameter(torch.empty(out_features, dtype=torch.float64).uniform_(-bound, bound)) if bias else None
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = matmul(x, self.weight)
        return out if self.bias is None else add(out, self.bias)


class GRUCell(nn.Module):
    def __init__(self, input_dim: int, hidden_dim: int) -> None:
        super().__init__()
        bound = 1.0 / math.sqrt(hidden_dim)

        def uniform(*shape: int) -> nn.Parameter:
            return nn.Parameter(torch.empty(*shape, dtype=torch.float64).uniform_(-bound, bound))

        self.weight_ih = uniform(input_dim, 3 * hidden_dim)
        self.weight_hh = uniform(hidden_dim, 3 * hidden_dim)
        self.bias_ih = uniform(3 * hidden_dim)
        self.bias_hh = uniform(3 * hidden_dim)

    def forward(self, x: torch.Tensor, h: torch.Tensor) -> torch.Tensor:
        return gru_cell(x, h, self.weight_ih, self.weight_hh, self.bias_ih, self.bias_hh)


class SectorEncoder(nn.Module):
    """A two-layer perceptron applied to every sector with the same weights."""

    def __init__(self, input_dim: int, feature_dim: int) -> None:
        super().__init__()
        self.hidden = Linear(input_dim, feature_dim)
        self.out = Linear(feature_dim, feature_dim)

    def forward(self, sectors: torch.Tensor) -> torch.Tensor:
        return tanh(self.out(relu(self.hidden(sectors))))


def concat_broadcast(per_sector: torch.Tensor, shared: torch.Tensor) -> torch.Tensor:
    """Concatenate a (B, d) vector onto each of the (B, n, k) rows of `per_sector`."""
    expanded = shared.unsqueeze(-2).expand(*per_sector.shape[:-1], shared.shape[-1])
    return concat([per_sector, expanded], dim=-1)
