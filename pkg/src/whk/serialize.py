"""JSON schemas for operators, product vectors, UPBs and result objects.

Operator schema (used repo-wide):
    {"dims": [dA, dB], "re": [[...]], "im": [[...]]}   row-major, dA*dB rows
Readers reject non-Hermitian payloads beyond tolerance.

UPB schema:
    {"dims": [dA, dB], "vectors": [{"e": [[re, im], ...], "f": [...]}]}
Complex entries serialize as [re, im] pairs; no string forms.
"""

from __future__ import annotations

import json
from typing import Optional

import numpy as np

from .core import Dims, HermitianOperator, ProductVector
from .errors import MalformedOperatorError, SchemaError
from .states import DecompositionCertificate, Detection, ProductDecomposition, QuantumState, Witness


def operator_to_dict(op: HermitianOperator) -> dict:
    return {
        "dims": [op.dims.da, op.dims.db],
        "re": op.mat.real.tolist(),
        "im": op.mat.imag.tolist(),
    }


def operator_from_dict(d: dict) -> HermitianOperator:
    if not isinstance(d, dict):
        raise SchemaError("operator payload must be an object", field="")
    for key in ("dims", "re", "im"):
        if key not in d:
            raise SchemaError(f"missing operator field {key!r}", field=key)
    dims = d["dims"]
    if (
        not isinstance(dims, (list, tuple))
        or len(dims) != 2
        or not all(isinstance(x, int) and x >= 2 for x in dims)
    ):
        raise SchemaError("dims must be two integers >= 2", field="dims")
    side = dims[0] * dims[1]
    try:
        re = np.asarray(d["re"], dtype=np.float64)
        im = np.asarray(d["im"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"matrix entries must be numeric: {exc}", field="re/im")
    if re.shape != (side, side):
        raise SchemaError(f"re must be {side}x{side}, got {re.shape}", field="re")
    if im.shape != (side, side):
        raise SchemaError(f"im must be {side}x{side}, got {im.shape}", field="im")
    try:
        return HermitianOperator(Dims(*dims), re + 1j * im)
    except MalformedOperatorError as exc:
        raise SchemaError(str(exc), field="re/im")


def _vec_to_pairs(v: np.ndarray) -> list:
    return [[float(x.real), float(x.imag)] for x in v]


def _vec_from_pairs(entries, field: str) -> np.ndarray:
    try:
        arr = np.asarray(entries, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"vector entries must be [re, im] pairs: {exc}", field=field)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise SchemaError("vector entries must be [re, im] pairs", field=field)
    return arr[:, 0] + 1j * arr[:, 1]


def product_vector_to_dict(pv: ProductVector) -> dict:
    return {"e": _vec_to_pairs(pv.e), "f": _vec_to_pairs(pv.f)}


def product_vector_from_dict(d: dict, field: str = "vectors") -> ProductVector:
    if not isinstance(d, dict) or "e" not in d or "f" not in d:
        raise SchemaError("product vector needs 'e' and 'f'", field=field)
    return ProductVector(
        _vec_from_pairs(d["e"], field=f"{field}.e"),
        _vec_from_pairs(d["f"], field=f"{field}.f"),
    )


def upb_to_dict(upb) -> dict:
    return {
        "dims": [upb.dims.da, upb.dims.db],
        "vectors": [product_vector_to_dict(pv) for pv in upb.vectors],
    }


def upb_from_dict(d: dict):
    from .families import UPBSpec

    if not isinstance(d, dict):
        raise SchemaError("UPB payload must be an object", field="")
    if "dims" not in d or "vectors" not in d:
        raise SchemaError("UPB needs 'dims' and 'vectors'", field="dims/vectors")
    dims = d["dims"]
    if (
        not isinstance(dims, (list, tuple))
        or len(dims) != 2
        or not all(isinstance(x, int) and x >= 2 for x in dims)
    ):
        raise SchemaError("dims must be two integers >= 2", field="dims")
    vectors = tuple(
        product_vector_from_dict(v, field=f"vectors[{i}]")
        for i, v in enumerate(d["vectors"])
    )
    return UPBSpec(Dims(*dims), vectors)


def state_to_dict(rho: QuantumState) -> dict:
    return {"operator": operator_to_dict(rho.op), "ppt_flag": rho.ppt_flag}


def witness_to_dict(w: Witness) -> dict:
    return {
        "operator": operator_to_dict(w.op),
        "min_product_expectation": w.min_product_expectation,
    }


def detection_to_dict(det: Detection) -> dict:
    return {"detected": det.detected, "value": det.value}


def product_decomposition_to_dict(cert: ProductDecomposition) -> dict:
    return {
        "weights": list(cert.weights),
        "vectors": [product_vector_to_dict(pv) for pv in cert.vectors],
        "residual": cert.residual,
    }


def decomposition_certificate_to_dict(cert: DecompositionCertificate) -> dict:
    return {
        "verdict": cert.verdict,
        "a": cert.a,
        "p": operator_to_dict(cert.p) if cert.p is not None else None,
        "q": operator_to_dict(cert.q) if cert.q is not None else None,
        "residual": cert.residual,
        "counterexample_state": (
            state_to_dict(cert.counterexample_state)
            if cert.counterexample_state is not None
            else None
        ),
    }


def bsa_result_to_dict(res) -> dict:
    return {
        "lambda_sep": res.lambda_sep,
        "sep_weights": [
            {"weight": w, **product_vector_to_dict(pv)} for w, pv in res.sep_weights
        ],
        "remainder": state_to_dict(res.remainder) if res.remainder is not None else None,
        "reconstruction_residual": res.reconstruction_residual,
    }


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"no such file: {path}", field="path")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}", field="path")


def read_operator(path: str) -> HermitianOperator:
    return operator_from_dict(load_json(path))


def read_state(path: str) -> QuantumState:
    from .states import as_state

    return as_state(read_operator(path))


def read_upb(path: str):
    return upb_from_dict(load_json(path))


def write_json(obj: dict, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=2)
    if path is None:
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")
