"""Text formats for rational expressions and sphere points.

Expressions are infix over the variable ``z`` with complex literals such as
``2i`` or ``1+2i``, the operators ``+ - * / ^`` (integer exponents only) and
parentheses.  ``**`` is accepted as a synonym for ``^``.
"""

from __future__ import annotations

import ast
import math
import re

from .errors import ParseError
from .mero import INF, MeroExpr, OneForm, SpherePoint, is_inf

_IMAG_LITERAL = re.compile(r"(?<![\w.])(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)i\b")
_LONE_I = re.compile(r"(?<![\w.])i\b")
_ALLOWED = re.compile(r"^[0-9zij.eE+\-*/^() \t]*$")


def _to_python(text: str) -> str:
    if not _ALLOWED.match(text):
        raise ParseError(f"unexpected characters in {text!r}")
    out = text.replace("^", "**")
    out = _IMAG_LITERAL.sub(r"\1j", out)
    out = _LONE_I.sub("1j", out)
    return out


def _eval_node(node, z: MeroExpr):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, z)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        if isinstance(node.value, bool):
            raise ParseError("booleans are not numbers here")
        return node.value
    if isinstance(node, ast.Name):
        if node.id == "z":
            return z
        raise ParseError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        val = _eval_node(node.operand, z)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _eval_node(node.left, z)
            exp = _eval_node(node.right, z)
            if isinstance(exp, MeroExpr):
                if not exp.is_constant:
                    raise ParseError("exponents must be integers")
                exp = complex(exp.at(0))
            if isinstance(exp, complex):
                if exp.imag != 0:
                    raise ParseError("exponents must be integers")
                exp = exp.real
            if isinstance(exp, float):
                if not exp.is_integer():
                    raise ParseError("exponents must be integers")
                exp = int(exp)
            if isinstance(base, MeroExpr):
                return base**exp
            try:
                return MeroExpr.constant(base) ** exp
            except ZeroDivisionError as exc:
                raise ParseError("zero raised to a negative power") from exc
        left = _eval_node(node.left, z)
        right = _eval_node(node.right, z)
        try:
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if not isinstance(left, MeroExpr) and not isinstance(right, MeroExpr):
                    return MeroExpr.constant(left) / right
                return left / right
        except ZeroDivisionError as exc:
            raise ParseError("division by zero") from exc
    raise ParseError(f"unsupported syntax: {ast.dump(node)}")


def parse_expr(text: str) -> MeroExpr:
    """Parse infix text into a reduced :class:`MeroExpr`.

    >>> parse_expr("1/(z*(z-2)*(2*z-1))").deg_den
    3
    """
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression")
    try:
        tree = ast.parse(_to_python(text.strip()), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from exc
    return MeroExpr.coerce(_eval_node(tree, MeroExpr.identity()))


def parse_form(text: str, *, allow_zero: bool = False) -> OneForm:
    """Parse the coefficient of a 1-form; a trailing ``dz`` is optional."""
    t = text.strip()
    if t.endswith("dz"):
        t = t[:-2].rstrip().rstrip("*").rstrip() or "1"
    return OneForm(parse_expr(t), allow_zero=allow_zero)


def parse_point(text: str) -> SpherePoint:
    """Parse ``inf`` or a complex literal such as ``1+2i``."""
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo", "∞"):
        return INF
    try:
        f = parse_expr(t)
    except ParseError as exc:
        raise ParseError(f"cannot parse point {text!r}") from exc
    if not f.is_constant:
        raise ParseError(f"point {text!r} depends on z")
    return complex(f.at(0))


def parse_points(text: str) -> list[SpherePoint]:
    """Comma-separated list of points; empty text gives an empty list."""
    if text is None or not str(text).strip():
        return []
    return [parse_point(p) for p in str(text).split(",")]


def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_point(p, digits: int = 12) -> str:
    """Inverse of :func:`parse_point`, rounded to ``digits`` significant digits."""
    if is_inf(p):
        return "inf"
    p = complex(p)
    re_, im = (float(f"{v:.{digits}g}") for v in (p.real, p.imag))
    re_ = 0.0 if re_ == 0 else re_
    im = 0.0 if im == 0 else im
    if im == 0:
        return _num(re_)
    if re_ == 0:
        return f"{_num(im)}i"
    sign = "+" if im > 0 else "-"
    return f"{_num(re_)}{sign}{_num(abs(im))}i"


def point_key(p) -> tuple:
    """Sort key placing finite points by (re, im) and infinity last."""
    if is_inf(p):
        return (1, math.inf, math.inf)
    p = complex(p)
    return (0, p.real, p.imag)
