"""Network construction contract: shapes, gradients, determinism,
config validation."""

import numpy as np
import pytest
import torch

from trithumb_nn.model import (
    HourglassConfig,
    ModelConfigError,
    apply_zero_planes,
    build_network,
    config_dict,
    config_from_dict,
    desk_config,
)
from trithumb_nn.infer import infer


def test_default_contract_shapes_and_gradients():
    """Default config: a 256x256x8 stack maps to 256x256x3 at every
    loss head, and the summed per-head MSE reaches every parameter."""
    cfg = HourglassConfig()
    assert (cfg.input_size, cfg.input_channels) == (256, 8)
    model = build_network(cfg)
    model.train()
    torch.manual_seed(1)
    x = torch.rand(2, 8, 256, 256)
    target = torch.rand(2, 3, 256, 256) * 255
    outs = model(x)
    assert len(outs) == cfg.stacks
    for o in outs:
        assert o.shape == (2, 3, 256, 256)
        od = o.detach()
        assert float(od.min()) >= 0.0 and float(od.max()) <= 255.0
    loss = sum(torch.mean((o - target) ** 2) for o in outs)
    loss.backward()
    for name, p in model.named_parameters():
        assert p.grad is not None, f"{name} got no gradient"
        assert torch.isfinite(p.grad).all(), f"{name} gradient not finite"
    print(f"\nnetwork contract: {len(outs)} heads of (2, 3, 256, 256), "
          f"{sum(p.numel() for p in model.parameters())} parameters, "
          "all with finite gradients  [PASS]")


@pytest.mark.parametrize("stacks", [1, 2, 3])
def test_stack_counts_construct(stacks):
    cfg = desk_config(stacks=stacks)
    model = build_network(cfg)
    model.eval()
    with torch.no_grad():
        outs = model(torch.zeros(1, 8, 64, 64))
    assert len(outs) == stacks
    assert all(o.shape == (1, 3, 64, 64) for o in outs)


def test_construction_is_deterministic():
    a = build_network(desk_config()).state_dict()
    b = build_network(desk_config()).state_dict()
    assert a.keys() == b.keys()
    for k in a:
        assert torch.equal(a[k], b[k]), k


def test_different_seed_changes_weights():
    a = build_network(desk_config(seed=0))
    b = build_network(desk_config(seed=1))
    assert not torch.equal(a.stem[0].weight, b.stem[0].weight)


def test_initial_loss_is_bounded():
    """Untrained output lives in [0, 255], so per-head MSE against any
    8-bit target stays below 255^2."""
    cfg = desk_config()
    model = build_network(cfg)
    model.eval()
    torch.manual_seed(2)
    target = torch.rand(1, 3, 64, 64) * 255
    with torch.no_grad():
        outs = model(torch.rand(1, 8, 64, 64))
    loss = sum(float(torch.mean((o - target) ** 2)) for o in outs)
    assert 0.0 < loss < cfg.stacks * 255.0 ** 2


def test_forward_rejects_wrong_shape():
    model = build_network(desk_config())
    with pytest.raises(ModelConfigError):
        model(torch.zeros(1, 7, 64, 64))
    with pytest.raises(ModelConfigError):
        model(torch.zeros(1, 8, 32, 32))


@pytest.mark.parametrize("bad", [
    dict(input_size=60),
    dict(input_size=0),
    dict(stacks=0),
    dict(levels=0),
    dict(base_filters=30),
    dict(input_size=64, levels=5),   # 16-pixel stem cannot halve 5 times
    dict(zero_planes=(8,)),
    dict(zero_planes=(-1,)),
])
def test_config_validation_rejects(bad):
    with pytest.raises(ModelConfigError):
        HourglassConfig(**bad).validate()


def test_config_dict_round_trip():
    cfg = desk_config(stacks=3, zero_planes=(0, 5))
    again = config_from_dict(config_dict(cfg))
    assert again == cfg
    assert isinstance(again.zero_planes, tuple)


def test_zero_planes_make_net_ignore_those_channels():
    cfg = desk_config(zero_planes=(0, 5, 6, 7))
    model = build_network(cfg)
    rng = np.random.default_rng(3)
    stack = rng.random((8, 64, 64)).astype(np.float32)
    noisy = stack.copy()
    noisy[[0, 5, 6, 7]] = rng.random((4, 64, 64)).astype(np.float32)
    assert np.array_equal(infer(model, stack), infer(model, noisy))


def test_apply_zero_planes_zeroes_exactly():
    x = torch.ones(2, 8, 4, 4)
    out = apply_zero_planes(x, (1, 3))
    assert torch.equal(out[:, (1, 3)], torch.zeros(2, 2, 4, 4))
    assert torch.equal(out[:, (0, 2, 4, 5, 6, 7)], torch.ones(2, 6, 4, 4))
    assert torch.equal(apply_zero_planes(x, ()), x)


def test_infer_output_contract():
    model = build_network(desk_config())
    stack = np.zeros((8, 64, 64), dtype=np.float32)
    out = infer(model, stack)
    assert out.shape == (64, 64, 3) and out.dtype == np.uint8
    assert np.array_equal(out, infer(model, stack))
    with pytest.raises(ModelConfigError):
        infer(model, np.zeros((8, 32, 32), dtype=np.float32))
