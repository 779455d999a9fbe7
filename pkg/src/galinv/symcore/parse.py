"""Expression grammar: infix parser, infix printer, stable prefix form.

The surface syntax is documented in ``docs/grammar.md``.  Highlights:

* jet coordinates in suffix form (``rho_t``, ``Theta_xx``) or the explicit
  form ``D[Theta,{x,2}]``;
* opaque calls ``M(a;b)`` with arguments separated by semicolons, formal
  derivatives written ``M^(1,0)(a;b)``;
* integer powers with ``^``; ``I`` is the imaginary unit;
* ``print_infix . parse_expr`` is the identity on canonical trees.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .expr import (Expr, Const, Ind, Jet, Sum, Prod, Pow, Opaque,
                   const, ex_sum, ex_mul, ex_pow, opaque,
                   K_CONST, K_IND, K_JET, K_POW, K_OPAQUE, K_PROD, K_SUM)
from .scalars import QI
from .space import JetSpace


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} (at position {pos})")
        self.pos = pos


_TOKEN_RE = re.compile(r"""
    (?P<num>\d+)
  | (?P<name>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)?)
  | (?P<op>[-+*/^()\[\]{},;])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, space: JetSpace):
        self.tokens = _tokenize(text)
        self.space = space
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        kind, text, pos = self.tokens[self.i]
        if value is not None and text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end'!r}", pos)
        self.i += 1
        return kind, text, pos

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {text!r}", pos)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-"):
            _, op, _ = self.take()
            t = self.term()
            terms.append(t if op == "+" else ex_mul((const(-1), t)))
        return ex_sum(terms)

    def term(self) -> Expr:
        factors = [self.signed()]
        while self.peek()[1] in ("*", "/"):
            _, op, _ = self.take()
            f = self.signed()
            factors.append(f if op == "*" else ex_pow(f, -1))
        return ex_mul(factors)

    def signed(self) -> Expr:
        neg = False
        while self.peek()[1] in ("+", "-"):
            if self.take()[1] == "-":
                neg = not neg
        p = self.power()
        return ex_mul((const(-1), p)) if neg else p

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return ex_pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        if self.peek()[1] == "(":
            self.take()
            k = self.exponent()
            self.take(")")
            return k
        sign = 1
        while self.peek()[1] in ("+", "-"):
            if self.take()[1] == "-":
                sign = -sign
        kind, text, pos = self.take()
        if kind != "num":
            raise ParseError("integer exponent expected", pos)
        return sign * int(text)

    def atom(self) -> Expr:
        kind, text, pos = self.peek()
        if text == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind == "num":
            self.take()
            return const(int(text))
        if kind != "name":
            raise ParseError(f"unexpected token {text or 'end'!r}", pos)
        self.take()
        if text == "I":
            return const(QI(0, 1))
        if text == "D" and self.peek()[1] == "[":
            return self.d_form(pos)
        is_coord = (text in self.space.independents or text in self.space.dependents
                    or "_" in text)
        if not is_coord:
            nxt = self.peek()[1]
            if nxt == "(" or (nxt == "^" and self.tokens[self.i + 1][1] == "("
                              and self._looks_like_dorder()):
                return self.call(text, pos)
        try:
            return self.space.atom(text)
        except KeyError as exc:
            raise ParseError(str(exc), pos) from None

    def _looks_like_dorder(self) -> bool:
        # distinguish M^(1,0)(a;b) and M^(2)(s) from a plain power x^(2):
        # the index list holds only integers/commas and an argument list follows
        j = self.i + 2  # after '^('
        only_ints = True
        while j < len(self.tokens) and self.tokens[j][1] != ")":
            if self.tokens[j][0] != "num" and self.tokens[j][1] != ",":
                only_ints = False
                break
            j += 1
        return (only_ints and j < len(self.tokens)
                and self.tokens[j][1] == ")"
                and j + 1 < len(self.tokens)
                and self.tokens[j + 1][1] == "(")

    def d_form(self, pos: int) -> Expr:
        # D[name,{t,1},{x,2}]
        self.take("[")
        kind, base, bpos = self.take()
        if kind != "name" or base not in self.space.dependents:
            raise ParseError(f"unknown dependent {base!r}", bpos)
        midx: list[int] = []
        while self.peek()[1] == ",":
            self.take()
            self.take("{")
            kind, ind, ipos = self.take()
            if ind not in self.space.independents:
                raise ParseError(f"unknown independent {ind!r}", ipos)
            self.take(",")
            kind, cnt, cpos = self.take()
            if kind != "num":
                raise ParseError("derivative count expected", cpos)
            midx.extend([self.space.ind_index(ind)] * int(cnt))
            self.take("}")
        self.take("]")
        return Jet(self.space.dep_index(base), tuple(sorted(midx)))

    def call(self, name: str, pos: int) -> Expr:
        dorder = None
        if self.peek()[1] == "^":
            self.take()
            self.take("(")
            dorder = [self._int()]
            while self.peek()[1] == ",":
                self.take()
                dorder.append(self._int())
            self.take(")")
        self.take("(")
        args = [self.expr()]
        while self.peek()[1] == ";":
            self.take()
            args.append(self.expr())
        self.take(")")
        if dorder is not None and len(dorder) != len(args):
            raise ParseError("derivative index arity mismatch", pos)
        return opaque(name, args, dorder)

    def _int(self) -> int:
        kind, text, pos = self.take()
        if kind != "num":
            raise ParseError("integer expected", pos)
        return int(text)


def parse_expr(text: str, space: JetSpace) -> Expr:
    """Parse the documented infix grammar into a canonical expression."""
    return _Parser(text, space).parse()


# ----------------------------------------------------------------------
# printing

def _print_scalar(v) -> str:
    if isinstance(v, QI):
        re_s = _print_scalar(v.re)
        if v.im == 0:
            return re_s
        im = v.im
        im_s = "I" if im == 1 else ("-I" if im == -1 else f"{_print_scalar(im)}*I")
        if v.re == 0:
            return im_s
        sign = "+" if not im_s.startswith("-") else ""
        return f"({re_s}{sign}{im_s})"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    return repr(v) if isinstance(v, float) else str(v)


# printing precedence (unrelated to the kind ordering ranks)
_P_SUM, _P_PROD, _P_POW, _P_ATOM = 1, 2, 3, 4


def print_infix(e: Expr, space: JetSpace) -> str:
    """Canonical infix form; parses back to an equal tree."""

    def pr(x: Expr, parent: int) -> str:
        if x.kind == K_CONST:
            s = _print_scalar(x.value)
            plain = not (s.startswith("-") or "/" in s or "*" in s or "+" in s)
            if parent <= _P_SUM or plain or s.startswith("("):
                return s
            return f"({s})"
        if x.kind in (K_IND, K_JET):
            return space.coord_name(x)
        if x.kind == K_SUM:
            parts = []
            for m, t in enumerate(x.terms):
                neg, pos_t = _split_negative(t)
                s = pr(pos_t, _P_SUM + 1)
                if m == 0:
                    parts.append(f"-{s}" if neg else s)
                else:
                    parts.append(f" - {s}" if neg else f" + {s}")
            body = "".join(parts)
            return f"({body})" if parent > _P_SUM else body
        if x.kind == K_PROD:
            num, den = [], []
            for f in x.factors:
                if f.kind == K_POW and f.exp < 0:
                    den.append(pr(ex_pow_display(f), _P_PROD + 1))
                else:
                    num.append(pr(f, _P_PROD + 1))
            body = "*".join(num) if num else "1"
            for d in den:
                body += f"/{d}"
            return f"({body})" if parent > _P_PROD else body
        if x.kind == K_POW:
            b = pr(x.base, _P_POW + 1)
            k = x.exp
            return f"{b}^{k}" if k >= 0 else f"{b}^({k})"
        if x.kind == K_OPAQUE:
            d = ""
            if any(x.dorder):
                d = "^(" + ",".join(str(t) for t in x.dorder) + ")"
            args = "; ".join(pr(a, _P_SUM) for a in x.args)
            return f"{x.name}{d}({args})"
        raise TypeError(type(x).__name__)

    return pr(e, _P_SUM)


def ex_pow_display(p: Pow) -> Expr:
    # 1/x prints as /x, 1/x^2 as /x^2
    return p.base if p.exp == -1 else Pow(p.base, -p.exp)


def _split_negative(t: Expr):
    """Factor a leading real-negative coefficient out of a sum term."""
    if t.kind == K_CONST and isinstance(t.value, (int, Fraction)) and t.value < 0:
        return True, const(-t.value)
    if (t.kind == K_PROD and t.factors[0].kind == K_CONST
            and isinstance(t.factors[0].value, (int, Fraction))
            and t.factors[0].value < 0):
        return True, ex_mul((const(-t.factors[0].value),) + t.factors[1:])
    return False, t


def print_prefix(e: Expr, space: JetSpace | None = None) -> str:
    """Stable s-expression form for golden tests and repr."""

    def nm_ind(i):
        return space.independents[i] if space else f"x{i}"

    def nm_dep(d):
        return space.dependents[d] if space else f"u{d}"

    def pr(x: Expr) -> str:
        if x.kind == K_CONST:
            return f"(q {_print_scalar(x.value)})"
        if x.kind == K_IND:
            return f"(ind {nm_ind(x.index)})"
        if x.kind == K_JET:
            idx = " ".join(nm_ind(i) for i in x.midx)
            return f"(jet {nm_dep(x.dep)}{' ' + idx if idx else ''})"
        if x.kind == K_SUM:
            return "(+ " + " ".join(pr(t) for t in x.terms) + ")"
        if x.kind == K_PROD:
            return "(* " + " ".join(pr(f) for f in x.factors) + ")"
        if x.kind == K_POW:
            return f"(^ {pr(x.base)} {x.exp})"
        if x.kind == K_OPAQUE:
            d = ",".join(str(t) for t in x.dorder)
            return f"(op {x.name} ({d}) " + " ".join(pr(a) for a in x.args) + ")"
        raise TypeError(type(x).__name__)

    return pr(e)
