import logging
from typing import Callable

import torch
from torch import nn

from fraudgraph.domain.exceptions import ConfigError, NumericError

logger = logging.getLogger(__name__)

GradientSet = dict[str, torch.Tensor]


def trainable(module: nn.Module) -> list[tuple[str, nn.Parameter]]:
    return [(name, p) for name, p in module.named_parameters() if p.requires_grad]


def backward(loss: torch.Tensor, module: nn.Module) -> GradientSet:
    """
    Gradientes exactos (modo reverso) de una perdida escalar.

    Los parametros que no intervienen en la perdida reciben ceros, asi el
    conjunto queda congruente con el modulo.

    Raises:
        NumericError: gradiente con NaN/inf, indicando el parametro
    """
    if loss.dim() != 0:
        raise NumericError("backward necesita una perdida escalar")
    named = trainable(module)
    grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)
    out: GradientSet = {}
    for (name, p), g in zip(named, grads):
        g = torch.zeros_like(p) if g is None else g.detach()
        if not torch.isfinite(g).all():
            raise NumericError("gradiente no finito", parameter_path=name)
        out[name] = g
    return out


def build_optimizer(module: nn.Module, name: str, lr: float) -> torch.optim.Optimizer:
    params = [p for _, p in trainable(module)]
    if name == "adam":
        return torch.optim.Adam(params, lr=lr)
    if name == "sgd":
        return torch.optim.SGD(params, lr=lr)
    raise ConfigError(f"optimizador desconocido: {name}")


def opt_step(module: nn.Module, grads: GradientSet, optimizer: torch.optim.Optimizer) -> nn.Module:
    """Carga `grads` en .grad y aplica un paso del optimizador configurado."""
    for name, p in trainable(module):
        p.grad = grads[name].clone()
    optimizer.step()
    optimizer.zero_grad(set_to_none=True)
    return module


def fd_check(module: nn.Module, loss_fn: Callable[[], torch.Tensor],
             h: float = 1e-5, floor: float = 1e-6) -> float:
    """
    Compara backward contra diferencias centrales, entrada por entrada.

    `loss_fn` debe ser determinista (no re-muestrear sub-grafos).

    Returns:
        Maximo error relativo |a - n| / max(|a|, |n|, floor)
    """
    grads = backward(loss_fn(), module)
    worst = 0.0
    with torch.no_grad():
        for name, p in trainable(module):
            flat = p.data.view(-1)
            analytic = grads[name].view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + h
                f_plus = loss_fn().item()
                flat[i] = orig - h
                f_minus = loss_fn().item()
                flat[i] = orig
                numeric = (f_plus - f_minus) / (2 * h)
                a = analytic[i].item()
                err = abs(a - numeric) / max(abs(a), abs(numeric), floor)
                if err > worst:
                    worst = err
                    logger.debug("fd_check %s[%d]: analitico %.6e numerico %.6e", name, i, a, numeric)
    return worst
