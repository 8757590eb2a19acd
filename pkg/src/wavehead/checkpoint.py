"""WCHK v1 head checkpoints.

Layout (little-endian, strings are u32 length + UTF-8, trailing bytes
rejected):

    magic 'WCHK' | version u16 = 1 | head type str ('wavelet'|'baseline')
    | wavelet family str ('' for baseline) | d u32 | config echo str
    | mlp count u16
    | per MLP: layer count u16, then per layer:
        out u32 | in u32 | activation u8 (0 identity, 1 gelu)
        | W row-major f64 | b f64
    | optimizer flag u8; if 1:
        lr, beta1, beta2, eps, weight_decay f64 | step u64
        | per layer (all MLPs in order): mW, mb, vW, vb f64 arrays
"""

import numpy as np

from ._binio import Reader, Writer
from .errors import FormatError
from .head import BaselineHeadParams, WaveletHeadParams
from .nn import Layer, MlpParams, OptimizerState
from .wavelet import make_filter_bank

MAGIC = b"WCHK"
VERSION = 1

_ACT_CODE = {"identity": 0, "gelu": 1}
_ACT_NAME = {v: k for k, v in _ACT_CODE.items()}


def save_head(path, params, config_echo: str = "", opt: OptimizerState | None = None) -> None:
    params.validate()
    w = Writer()
    w.raw(MAGIC)
    w.u16(VERSION)
    if isinstance(params, WaveletHeadParams):
        w.string("wavelet")
        w.string(params.fb.family)
        mlps = [params.low_mlp, params.cls_mlp]
    else:
        w.string("baseline")
        w.string("")
        mlps = [params.cls_mlp]
    w.u32(params.d)
    w.string(config_echo)
    w.u16(len(mlps))
    all_layers = []
    for mlp in mlps:
        w.u16(len(mlp.layers))
        for layer in mlp.layers:
            out_dim, in_dim = layer.w.shape
            w.u32(out_dim)
            w.u32(in_dim)
            w.u8(_ACT_CODE[layer.act])
            w.f64_array(layer.w)
            w.f64_array(layer.b)
            all_layers.append(layer)
    if opt is None:
        w.u8(0)
    else:
        if len(opt.m) != len(all_layers):
            raise FormatError(
                f"optimizer tracks {len(opt.m)} layers, head has {len(all_layers)}"
            )
        w.u8(1)
        for v in (opt.lr, opt.beta1, opt.beta2, opt.eps, opt.weight_decay):
            w.f64(v)
        w.u64(opt.step)
        for (mw, mb), (vw, vb) in zip(opt.m, opt.v):
            w.f64_array(mw)
            w.f64_array(mb)
            w.f64_array(vw)
            w.f64_array(vb)
    with open(path, "wb") as fh:
        fh.write(w.getvalue())


def load_head(path):
    """Return (params, config_echo, optimizer state or None)."""
    with open(path, "rb") as fh:
        data = fh.read()
    r = Reader(data)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    version = r.u16("version")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    head_type = r.string("head type")
    if head_type not in ("wavelet", "baseline"):
        raise FormatError(f"unknown head type {head_type!r}")
    family = r.string("wavelet family")
    d = r.u32("dimension")
    config_echo = r.string("config echo")
    n_mlps = r.u16("mlp count")
    expected = 2 if head_type == "wavelet" else 1
    if n_mlps != expected:
        raise FormatError(
            f"{head_type} head stores {expected} MLPs, file has {n_mlps}"
        )
    mlps = []
    for m in range(n_mlps):
        n_layers = r.u16(f"mlp {m} layer count")
        layers = []
        for i in range(n_layers):
            out_dim = r.u32(f"mlp {m} layer {i} out dim")
            in_dim = r.u32(f"mlp {m} layer {i} in dim")
            pos = r.pos
            code = r.u8(f"mlp {m} layer {i} activation")
            if code not in _ACT_NAME:
                raise FormatError(f"unknown activation code {code}", offset=pos)
            pos = r.pos
            wmat = r.f64_array(out_dim * in_dim, f"mlp {m} layer {i} weights")
            bvec = r.f64_array(out_dim, f"mlp {m} layer {i} bias")
            if not (np.isfinite(wmat).all() and np.isfinite(bvec).all()):
                raise FormatError(
                    f"mlp {m} layer {i} has non-finite parameters", offset=pos
                )
            layers.append(
                Layer(w=wmat.reshape(out_dim, in_dim), b=bvec, act=_ACT_NAME[code])
            )
        if not layers:
            raise FormatError(f"mlp {m} has no layers")
        for prev, nxt in zip(layers[:-1], layers[1:]):
            if nxt.w.shape[1] != prev.w.shape[0]:
                raise FormatError(
                    f"mlp {m} layer dims do not chain: "
                    f"{prev.w.shape[0]} -> {nxt.w.shape[1]}"
                )
        mlps.append(MlpParams(layers))
    if head_type == "wavelet":
        params = WaveletHeadParams(
            low_mlp=mlps[0], cls_mlp=mlps[1], fb=make_filter_bank(family)
        )
    else:
        params = BaselineHeadParams(cls_mlp=mlps[0])
    if params.d != d:
        raise FormatError(f"stored d={d} but classifier input is {params.d}")
    opt = None
    if r.u8("optimizer flag"):
        lr = r.f64("lr")
        beta1 = r.f64("beta1")
        beta2 = r.f64("beta2")
        eps = r.f64("eps")
        wd = r.f64("weight decay")
        step = r.u64("step")
        m, v = [], []
        for mlp in mlps:
            for layer in mlp.layers:
                out_dim, in_dim = layer.w.shape
                mw = r.f64_array(out_dim * in_dim, "first moment W").reshape(out_dim, in_dim)
                mb = r.f64_array(out_dim, "first moment b")
                vw = r.f64_array(out_dim * in_dim, "second moment W").reshape(out_dim, in_dim)
                vb = r.f64_array(out_dim, "second moment b")
                m.append((mw, mb))
                v.append((vw, vb))
        opt = OptimizerState(
            lr=lr, beta1=beta1, beta2=beta2, eps=eps, weight_decay=wd,
            step=step, m=m, v=v,
        )
    r.expect_eof()
    try:
        params.validate()
    except Exception as exc:
        raise FormatError(f"checkpoint violates head invariants: {exc}")
    return params, config_echo, opt
