import numpy as np
import pytest

from partbench.completion import (
    CHANNEL_ROLES,
    CompletionRequest,
    complete,
    conditioning_bytes,
    pack_conditioning,
    parse_conditioning,
)
from partbench.errors import FormatError, PartbenchError
from partbench.render import foreground_psnr


def test_request_contract():
    img = np.random.default_rng(0).random((16, 16, 3))
    mask = np.zeros((16, 16), bool)
    mask[4:9, 4:9] = True
    req = CompletionRequest.from_image(img, mask)
    assert np.all(req.masked_image[~mask] == 0)
    with pytest.raises(ValueError):
        CompletionRequest(img, img, mask)


def test_passthrough_and_oracle(bundle0):
    k = int(np.argmax(bundle0.masks.sum(axis=(1, 2))))
    req = CompletionRequest.from_image(bundle0.rgb, bundle0.masks[k])
    p = complete("passthrough", req)
    assert np.array_equal(p.image, req.masked_image) and np.array_equal(p.foreground, req.mask)
    o = complete("oracle", req, (bundle0.part_rgb[k], bundle0.part_foreground[k]))
    assert np.array_equal(o.image, bundle0.part_rgb[k])
    with pytest.raises(PartbenchError):
        complete("oracle", req)
    with pytest.raises(ValueError):
        complete("diffusion", req)


def test_symmetry_never_worse_than_passthrough_on_mirrored_occluder():
    # a bar occluded on its right half by a box in front; mirror fill recovers it
    tile = np.zeros((16, 16, 3))
    truth = np.zeros((16, 16, 3))
    truth[6:10, 3:13] = 0.7
    occluder = np.zeros((16, 16), bool)
    occluder[4:12, 8:14] = True
    image = np.where(occluder[..., None], 0.2, truth)
    mask = truth.any(-1) & ~occluder
    grid = np.concatenate([np.concatenate([image] * 2, 1)] * 2, 0)
    mgrid = np.concatenate([np.concatenate([mask] * 2, 1)] * 2, 0)
    tgrid = np.concatenate([np.concatenate([truth] * 2, 1)] * 2, 0)
    req = CompletionRequest.from_image(grid, mgrid)
    fg = tgrid.any(-1)
    sym = foreground_psnr(tgrid, complete("symmetry", req).image, fg)
    pas = foreground_psnr(tgrid, complete("passthrough", req).image, fg)
    assert sym > pas


def test_symmetry_empty_mask_flags():
    img = np.zeros((16, 16, 3))
    r = complete("symmetry", CompletionRequest.from_image(img, np.zeros((16, 16), bool)))
    assert "no-evidence" in r.flags


def test_conditioning_block_layout_and_round_trip():
    img = np.random.default_rng(1).random((32, 48, 3))
    mask = np.zeros((32, 48), bool)
    mask[:16, :8] = True
    block = pack_conditioning(CompletionRequest.from_image(img, mask))
    assert block.shape == (25, 4, 6) and block.dtype == np.float32
    assert np.all(block[:8] == 0)
    assert block[24, 0, 0] == 1.0 and block[24, 3, 5] == 0.0
    assert np.allclose(block[16:19, 0, 0], img[:8, :8].mean(axis=(0, 1)), atol=1e-6)
    back, header = parse_conditioning(conditioning_bytes(block))
    assert np.array_equal(back, block)
    assert header["shape"] == (25, 4, 6) and header["roles"] == CHANNEL_ROLES
    with pytest.raises(FormatError):
        parse_conditioning(b"BAD!" + conditioning_bytes(block)[4:])
    with pytest.raises(ValueError):
        pack_conditioning(CompletionRequest.from_image(np.zeros((12, 12, 3)), np.zeros((12, 12), bool)))
