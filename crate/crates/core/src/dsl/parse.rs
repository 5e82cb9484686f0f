//! Recursive-descent parser producing a validated [`PDESystem`].

use super::lex::{lex, Span, Tok, Token};
use super::{
    err, validate_system, Equation, GammaSpec, MhEquationDecl, MhQuadDecl, PDESystem,
    ParseDiagnostic, Severity, TraceDecl,
};
use crate::expr::{Atom, Expr, LinearOpSpec, MultiIndex, Side};
use num::{BigRational, ToPrimitive};

const DECL_KEYWORDS: &[&str] =
    &["dim", "coords", "unknowns", "coeffs", "gamma", "trace", "eq", "mh", "box"];
const RESERVED: &[&str] = &[
    "system", "dim", "coords", "unknowns", "coeffs", "gamma", "trace", "eq", "mh", "box", "lin",
    "quad", "minus", "plus", "D", "omega",
];

fn reserved_name_reason(s: &str) -> Option<String> {
    if RESERVED.contains(&s) {
        return Some(format!("`{s}` is reserved"));
    }
    for prefix in ["um_", "up_", "psi_", "chi_"] {
        if s.starts_with(prefix) {
            return Some(format!("the prefix `{prefix}` is reserved"));
        }
    }
    None
}

/// Declared name tables; resolution context for expressions.
struct Names {
    dim: usize,
    coords: Vec<String>,
    unknowns: Vec<String>,
    coeffs: Vec<String>,
}

impl Names {
    fn coord(&self, s: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == s)
    }
    fn unknown(&self, s: &str) -> Option<usize> {
        self.unknowns.iter().position(|c| c == s)
    }
    fn coeff(&self, s: &str) -> Option<usize> {
        self.coeffs.iter().position(|c| c == s)
    }
}

/// What identifiers an expression position may use.
#[derive(Clone, Copy, PartialEq)]
enum ExprMode {
    /// Equation left side: coordinates, coefficients, unknown jets.
    Lhs,
    /// Right sides: coordinates and coefficients only.
    Rhs,
    /// γ / trace / box data: coordinates only.
    CoordsOnly,
    /// Everything, including γ/ω/ψ/χ/trace jets (rendered-output round trips).
    Extended,
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    end_span: Span,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], end_span: Span) -> Self {
        Cursor { toks, pos: 0, end_span }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or(self.end_span)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t.map(|t| &t.tok)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseDiagnostic> {
        let span = self.span();
        if self.eat(tok) {
            Ok(())
        } else {
            Err(err(span, format!("expected {tok} {what}")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Span), ParseDiagnostic> {
        let span = self.span();
        match self.next() {
            Some(Tok::Ident(s)) => Ok((s.clone(), span)),
            _ => Err(err(span, format!("expected an identifier {what}"))),
        }
    }

    fn expect_usize(&mut self, what: &str) -> Result<usize, ParseDiagnostic> {
        let span = self.span();
        match self.next() {
            Some(Tok::Number(n)) if n.is_integer() => n
                .to_integer()
                .to_usize()
                .ok_or_else(|| err(span, format!("integer out of range {what}"))),
            _ => Err(err(span, format!("expected an integer {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

struct ExprParser<'a> {
    cur: Cursor<'a>,
    names: &'a Names,
    mode: ExprMode,
}

impl<'a> ExprParser<'a> {
    fn parse_expr(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut acc = self.parse_term()?;
        loop {
            if self.cur.eat(&Tok::Plus) {
                acc = acc + self.parse_term()?;
            } else if self.cur.eat(&Tok::Minus) {
                acc = acc - self.parse_term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut acc = self.parse_factor()?;
        while self.cur.eat(&Tok::Star) {
            acc = acc * self.parse_factor()?;
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseDiagnostic> {
        if self.cur.eat(&Tok::Minus) {
            return Ok(-self.parse_factor()?);
        }
        let mut base = self.parse_primary()?;
        while self.cur.eat(&Tok::Caret) {
            let span = self.cur.span();
            let exp = self.cur.expect_usize("as exponent")?;
            let exp = u32::try_from(exp).map_err(|_| err(span, "exponent too large"))?;
            base = base.pow(exp);
        }
        Ok(base)
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseDiagnostic> {
        let span = self.cur.span();
        match self.cur.next() {
            Some(Tok::Number(n)) => Ok(Expr::constant(n.clone())),
            Some(Tok::LParen) => {
                let inner = self.parse_expr()?;
                self.cur.expect(&Tok::RParen, "to close the parenthesis")?;
                Ok(inner)
            }
            Some(Tok::Ident(s)) if s == "D" => {
                let p = parse_d_brackets(&mut self.cur, self.names.dim)?;
                let (name, nspan) = self.cur.expect_ident("after D[..]")?;
                self.jet_atom(&name, p, nspan)
            }
            Some(Tok::Ident(s)) => self.plain_atom(s, span),
            _ => Err(err(span, "expected an expression")),
        }
    }

    fn plain_atom(&mut self, s: &str, span: Span) -> Result<Expr, ParseDiagnostic> {
        if let Some(i) = self.names.coord(s) {
            return Ok(Expr::atom(Atom::Coordinate(i)));
        }
        self.jet_atom(s, MultiIndex::zero(self.names.dim), span)
    }

    fn jet_atom(&mut self, s: &str, p: MultiIndex, span: Span) -> Result<Expr, ParseDiagnostic> {
        if self.names.coord(s).is_some() {
            return Err(err(span, format!("cannot differentiate coordinate `{s}` with D[..]")));
        }
        if let Some(alpha) = self.names.unknown(s) {
            if matches!(self.mode, ExprMode::Lhs | ExprMode::Extended) {
                return Ok(Expr::atom(Atom::UnknownJet { alpha, deriv: p }));
            }
            return Err(err(span, format!("unknown `{s}` is not allowed in this position")));
        }
        if let Some(_i) = self.names.coeff(s) {
            if self.mode == ExprMode::CoordsOnly {
                return Err(err(span, format!("coefficient `{s}` is not allowed in this position")));
            }
            return Ok(Expr::atom(Atom::CoeffFn { name: s.to_string(), deriv: p }));
        }
        if self.mode == ExprMode::Extended {
            if s == "gamma" {
                return Ok(Expr::atom(Atom::GammaJet(p)));
            }
            if s == "omega" {
                return Ok(Expr::atom(Atom::OmegaJet(p)));
            }
            for (prefix, make) in [
                ("um_", 0usize),
                ("up_", 1),
                ("psi_", 2),
                ("chi_", 3),
            ] {
                if let Some(rest) = s.strip_prefix(prefix) {
                    let alpha = self.names.unknown(rest).ok_or_else(|| {
                        err(span, format!("unknown identifier {rest} after `{prefix}`"))
                    })?;
                    let atom = match make {
                        0 => Atom::TraceJet { side: Side::Minus, alpha, deriv: p },
                        1 => Atom::TraceJet { side: Side::Plus, alpha, deriv: p },
                        2 => Atom::PsiJet { alpha, deriv: p },
                        _ => Atom::ChiJet { alpha, deriv: p },
                    };
                    return Ok(Expr::atom(atom));
                }
            }
        }
        Err(err(span, format!("unknown identifier {s}")))
    }
}

/// `[` INT {"," INT} `]` after a `D`, 1-based directions.
fn parse_d_brackets(cur: &mut Cursor, dim: usize) -> Result<MultiIndex, ParseDiagnostic> {
    cur.expect(&Tok::LBracket, "after D")?;
    let mut entries = vec![0u32; dim];
    loop {
        let span = cur.span();
        let i = cur.expect_usize("as a direction index")?;
        if i == 0 || i > dim {
            return Err(err(span, format!("direction index {i} out of range 1..={dim}")));
        }
        entries[i - 1] += 1;
        if cur.eat(&Tok::Comma) {
            continue;
        }
        cur.expect(&Tok::RBracket, "to close D[..]")?;
        return Ok(MultiIndex::from_entries(entries));
    }
}

/// Operator expressions: sums of products of x-only scalars and `D[..]`
/// factors. All scalar factors act as outer coefficients: `D[1]*c` ≡ `c*D[1]`.
fn parse_op_expr(
    cur: &mut Cursor,
    names: &Names,
) -> Result<Vec<(Expr, MultiIndex)>, ParseDiagnostic> {
    let mut acc = parse_op_term(cur, names)?;
    loop {
        if cur.eat(&Tok::Plus) {
            acc.extend(parse_op_term(cur, names)?);
        } else if cur.eat(&Tok::Minus) {
            acc.extend(parse_op_term(cur, names)?.into_iter().map(|(c, q)| (-c, q)));
        } else {
            return Ok(acc);
        }
    }
}

fn parse_op_term(
    cur: &mut Cursor,
    names: &Names,
) -> Result<Vec<(Expr, MultiIndex)>, ParseDiagnostic> {
    let mut acc = parse_op_factor(cur, names)?;
    while cur.eat(&Tok::Star) {
        let rhs = parse_op_factor(cur, names)?;
        let mut merged = Vec::with_capacity(acc.len() * rhs.len());
        for (c1, q1) in &acc {
            for (c2, q2) in &rhs {
                merged.push((c1.clone() * c2.clone(), q1.add(q2)));
            }
        }
        acc = merged;
    }
    Ok(acc)
}

fn parse_op_factor(
    cur: &mut Cursor,
    names: &Names,
) -> Result<Vec<(Expr, MultiIndex)>, ParseDiagnostic> {
    if cur.eat(&Tok::Minus) {
        return Ok(parse_op_factor(cur, names)?.into_iter().map(|(c, q)| (-c, q)).collect());
    }
    let span = cur.span();
    let mut base: Vec<(Expr, MultiIndex)> = match cur.next() {
        Some(Tok::Number(v)) => vec![(Expr::constant(v.clone()), MultiIndex::zero(names.dim))],
        Some(Tok::LParen) => {
            let inner = parse_op_expr(cur, names)?;
            cur.expect(&Tok::RParen, "to close the parenthesis")?;
            inner
        }
        Some(Tok::Ident(s)) if s == "D" => {
            vec![(Expr::one(), parse_d_brackets(cur, names.dim)?)]
        }
        Some(Tok::Ident(s)) => {
            let atom = if let Some(i) = names.coord(s) {
                Atom::Coordinate(i)
            } else if names.coeff(s).is_some() {
                Atom::CoeffFn { name: s.clone(), deriv: MultiIndex::zero(names.dim) }
            } else {
                return Err(err(span, format!("unknown identifier {s} in operator")));
            };
            vec![(Expr::atom(atom), MultiIndex::zero(names.dim))]
        }
        _ => return Err(err(span, "expected an operator factor")),
    };
    while cur.eat(&Tok::Caret) {
        let exp = cur.expect_usize("as exponent")?;
        let mut powered: Vec<(Expr, MultiIndex)> =
            vec![(Expr::one(), MultiIndex::zero(names.dim))];
        for _ in 0..exp {
            let mut next = Vec::new();
            for (c1, q1) in &powered {
                for (c2, q2) in &base {
                    next.push((c1.clone() * c2.clone(), q1.add(q2)));
                }
            }
            powered = next;
        }
        base = powered;
    }
    Ok(base)
}

/// One declaration: keyword token index plus its body token range.
struct DeclSlice<'a> {
    keyword: &'a str,
    span: Span,
    body: &'a [Token],
}

fn split_decls(toks: &[Token]) -> Result<(String, Vec<DeclSlice<'_>>), Vec<ParseDiagnostic>> {
    let mut diags = Vec::new();
    let name = match (toks.first().map(|t| &t.tok), toks.get(1).map(|t| &t.tok)) {
        (Some(Tok::Ident(kw)), Some(Tok::Ident(name))) if kw == "system" => {
            if let Some(reason) = reserved_name_reason(name) {
                diags.push(err(toks[1].span, format!("invalid system name: {reason}")));
            }
            name.clone()
        }
        _ => {
            let span = toks.first().map(|t| t.span).unwrap_or(Span { line: 1, col: 1 });
            return Err(vec![err(span, "expected `system <name>` header")]);
        }
    };
    let mut decls = Vec::new();
    let mut depth = 0usize;
    let mut current: Option<(usize, &str, Span)> = None;
    for (i, t) in toks.iter().enumerate().skip(2) {
        match &t.tok {
            Tok::LBracket | Tok::LParen => depth += 1,
            Tok::RBracket | Tok::RParen => depth = depth.saturating_sub(1),
            Tok::Ident(s) if depth == 0 && DECL_KEYWORDS.contains(&s.as_str()) => {
                if let Some((start, kw, span)) = current.take() {
                    decls.push(DeclSlice { keyword: kw, span, body: &toks[start..i] });
                }
                current = Some((i + 1, s.as_str(), t.span));
            }
            _ => {
                if current.is_none() {
                    diags.push(err(t.span, "expected a declaration keyword"));
                    return Err(diags);
                }
            }
        }
    }
    if let Some((start, kw, span)) = current.take() {
        decls.push(DeclSlice { keyword: kw, span, body: &toks[start..] });
    }
    if diags.is_empty() {
        Ok((name, decls))
    } else {
        Err(diags)
    }
}

fn collect_names(decls: &[DeclSlice], diags: &mut Vec<ParseDiagnostic>) -> Option<Names> {
    let mut dim: Option<usize> = None;
    let mut coords: Option<Vec<String>> = None;
    let mut unknowns: Vec<String> = Vec::new();
    let mut coeffs: Vec<String> = Vec::new();
    for d in decls {
        match d.keyword {
            "dim" => {
                let mut cur = Cursor::new(d.body, d.span);
                match cur.expect_usize("after `dim`") {
                    Ok(n) if cur.at_end() => {
                        if dim.replace(n).is_some() {
                            diags.push(err(d.span, "duplicate `dim` declaration"));
                        }
                    }
                    Ok(_) => diags.push(err(cur.span(), "unexpected tokens after `dim`")),
                    Err(e) => diags.push(e),
                }
            }
            "coords" | "unknowns" | "coeffs" => {
                let mut list = Vec::new();
                for t in d.body {
                    match &t.tok {
                        Tok::Ident(s) => {
                            if let Some(reason) = reserved_name_reason(s) {
                                diags.push(err(t.span, format!("invalid name `{s}`: {reason}")));
                            } else {
                                list.push(s.clone());
                            }
                        }
                        _ => diags.push(err(t.span, format!("expected a name in `{}`", d.keyword))),
                    }
                }
                if list.is_empty() {
                    diags.push(err(d.span, format!("`{}` declares no names", d.keyword)));
                }
                match d.keyword {
                    "coords" => {
                        if coords.replace(list).is_some() {
                            diags.push(err(d.span, "duplicate `coords` declaration"));
                        }
                    }
                    "unknowns" => unknowns.extend(list),
                    _ => coeffs.extend(list),
                }
            }
            _ => {}
        }
    }
    let dim = match (dim, &coords) {
        (Some(n), Some(c)) => {
            if c.len() != n {
                diags.push(err(
                    Span { line: 1, col: 1 },
                    format!("dim {n} disagrees with {} coordinate names", c.len()),
                ));
            }
            n
        }
        (Some(n), None) => n,
        (None, Some(c)) => c.len(),
        (None, None) => {
            diags.push(err(Span { line: 1, col: 1 }, "either `dim` or `coords` is required"));
            return None;
        }
    };
    let coords = coords.unwrap_or_else(|| (1..=dim).map(|i| format!("x{i}")).collect());
    let mut seen = std::collections::BTreeSet::new();
    for name in coords.iter().chain(&unknowns).chain(&coeffs) {
        if !seen.insert(name.clone()) {
            diags.push(err(Span { line: 1, col: 1 }, format!("name `{name}` declared twice")));
        }
    }
    Some(Names { dim, coords, unknowns, coeffs })
}

fn parse_expr_in(
    body: &[Token],
    end_span: Span,
    names: &Names,
    mode: ExprMode,
) -> Result<Expr, ParseDiagnostic> {
    let mut p = ExprParser { cur: Cursor::new(body, end_span), names, mode };
    let e = p.parse_expr()?;
    if !p.cur.at_end() {
        return Err(err(p.cur.span(), "unexpected trailing tokens in expression"));
    }
    Ok(e)
}

/// Parse a complete system file. `Err` carries at least one error diagnostic;
/// structural validation runs as part of parsing.
pub fn parse_system(text: &str) -> Result<PDESystem, Vec<ParseDiagnostic>> {
    let toks = lex(text).map_err(|(span, msg)| vec![err(span, msg)])?;
    let (name, decls) = split_decls(&toks)?;
    let mut diags: Vec<ParseDiagnostic> = Vec::new();
    let Some(names) = collect_names(&decls, &mut diags) else {
        return Err(diags);
    };

    let mut equations = Vec::new();
    let mut gamma = GammaSpec::default();
    let mut traces = Vec::new();
    let mut mh = Vec::new();
    let mut domain_box = None;

    for d in &decls {
        let end_span = d.body.last().map(|t| t.span).unwrap_or(d.span);
        match d.keyword {
            "dim" | "coords" | "unknowns" | "coeffs" => {}
            "gamma" => {
                let result = (|| -> Result<Expr, ParseDiagnostic> {
                    let mut cur = Cursor::new(d.body, end_span);
                    cur.expect(&Tok::Colon, "after `gamma`")?;
                    parse_expr_in(&d.body[cur.pos..], end_span, &names, ExprMode::CoordsOnly)
                })();
                match result {
                    Ok(e) => {
                        if gamma.closed_form.replace(e).is_some() {
                            diags.push(err(d.span, "duplicate `gamma` declaration"));
                        }
                        gamma.span = Some(d.span);
                    }
                    Err(e) => diags.push(e),
                }
            }
            "trace" => {
                let result = (|| -> Result<TraceDecl, ParseDiagnostic> {
                    let mut cur = Cursor::new(d.body, end_span);
                    let (side_name, sspan) = cur.expect_ident("after `trace`")?;
                    let side = match side_name.as_str() {
                        "minus" => Side::Minus,
                        "plus" => Side::Plus,
                        other => {
                            return Err(err(sspan, format!("expected `minus` or `plus`, got `{other}`")))
                        }
                    };
                    let (uname, uspan) = cur.expect_ident("naming the unknown")?;
                    let alpha = names
                        .unknown(&uname)
                        .ok_or_else(|| err(uspan, format!("unknown identifier {uname}")))?;
                    cur.expect(&Tok::Colon, "before the trace expression")?;
                    let expr =
                        parse_expr_in(&d.body[cur.pos..], end_span, &names, ExprMode::CoordsOnly)?;
                    Ok(TraceDecl { side, alpha, expr, span: d.span })
                })();
                match result {
                    Ok(t) => traces.push(t),
                    Err(e) => diags.push(e),
                }
            }
            "eq" => {
                let result = (|| -> Result<Equation, ParseDiagnostic> {
                    let mut cur = Cursor::new(d.body, end_span);
                    cur.expect(&Tok::Colon, "after `eq`")?;
                    let eq_pos = d.body[cur.pos..]
                        .iter()
                        .position(|t| t.tok == Tok::Equals)
                        .map(|i| i + cur.pos);
                    let Some(eq_pos) = eq_pos else {
                        return Err(err(d.span, "equation has no `=`"));
                    };
                    let lhs_toks = &d.body[cur.pos..eq_pos];
                    let rhs_toks = &d.body[eq_pos + 1..];
                    if lhs_toks.is_empty() {
                        return Err(err(d.span, "missing left-hand side"));
                    }
                    if rhs_toks.is_empty() {
                        return Err(err(d.body[eq_pos].span, "missing right-hand side"));
                    }
                    let lhs = parse_expr_in(lhs_toks, end_span, &names, ExprMode::Lhs)?;
                    let rhs = parse_expr_in(rhs_toks, end_span, &names, ExprMode::Rhs)?;
                    Ok(Equation { beta: equations.len() + 1, lhs, rhs, span: d.span })
                })();
                match result {
                    Ok(eq) => equations.push(eq),
                    Err(e) => diags.push(e),
                }
            }
            "mh" => {
                let result = (|| -> Result<MhEquationDecl, ParseDiagnostic> {
                    let mut cur = Cursor::new(d.body, end_span);
                    cur.expect(&Tok::LBracket, "after `mh`")?;
                    let beta = cur.expect_usize("as equation index")?;
                    cur.expect(&Tok::RBracket, "after the equation index")?;
                    cur.expect(&Tok::Colon, "after `mh[..]`")?;
                    let mut linear = Vec::new();
                    let mut quads = Vec::new();
                    loop {
                        let (kind, kspan) = cur.expect_ident("(`lin` or `quad`)")?;
                        match kind.as_str() {
                            "lin" => {
                                cur.expect(&Tok::LBracket, "after `lin`")?;
                                let (uname, uspan) = cur.expect_ident("naming the unknown")?;
                                let alpha = names.unknown(&uname).ok_or_else(|| {
                                    err(uspan, format!("unknown identifier {uname}"))
                                })?;
                                cur.expect(&Tok::RBracket, "after the unknown")?;
                                cur.expect(&Tok::LParen, "before the operator")?;
                                let terms = parse_op_expr(&mut cur, &names)?;
                                cur.expect(&Tok::RParen, "after the operator")?;
                                let op = LinearOpSpec::new(names.dim, terms)
                                    .map_err(|e| err(kspan, e.to_string()))?;
                                linear.push((alpha, op));
                            }
                            "quad" => {
                                cur.expect(&Tok::LParen, "before the outer operator")?;
                                let terms = parse_op_expr(&mut cur, &names)?;
                                cur.expect(&Tok::RParen, "after the outer operator")?;
                                let outer = LinearOpSpec::new(names.dim, terms)
                                    .map_err(|e| err(kspan, e.to_string()))?;
                                cur.expect(&Tok::LBracket, "before the entry list")?;
                                let mut entries = Vec::new();
                                loop {
                                    let (l, lspan) = cur.expect_ident("naming the left unknown")?;
                                    let al = names.unknown(&l).ok_or_else(|| {
                                        err(lspan, format!("unknown identifier {l}"))
                                    })?;
                                    cur.expect(&Tok::Comma, "between the unknowns")?;
                                    let (r, rspan) = cur.expect_ident("naming the right unknown")?;
                                    let ar = names.unknown(&r).ok_or_else(|| {
                                        err(rspan, format!("unknown identifier {r}"))
                                    })?;
                                    cur.expect(&Tok::Colon, "before the entry operator")?;
                                    let terms = parse_op_expr(&mut cur, &names)?;
                                    let p = LinearOpSpec::new(names.dim, terms)
                                        .map_err(|e| err(kspan, e.to_string()))?;
                                    entries.push((al, ar, p));
                                    if cur.eat(&Tok::Semi) {
                                        continue;
                                    }
                                    cur.expect(&Tok::RBracket, "to close the entry list")?;
                                    break;
                                }
                                quads.push(MhQuadDecl { outer, entries });
                            }
                            other => {
                                return Err(err(
                                    kspan,
                                    format!("expected `lin` or `quad`, got `{other}`"),
                                ))
                            }
                        }
                        if cur.eat(&Tok::Plus) {
                            continue;
                        }
                        if !cur.at_end() {
                            return Err(err(cur.span(), "unexpected tokens in `mh` declaration"));
                        }
                        break;
                    }
                    Ok(MhEquationDecl { beta, linear, quads, span: d.span })
                })();
                match result {
                    Ok(m) => mh.push(m),
                    Err(e) => diags.push(e),
                }
            }
            "box" => {
                let result = (|| -> Result<Vec<(BigRational, BigRational)>, ParseDiagnostic> {
                    let mut cur = Cursor::new(d.body, end_span);
                    cur.expect(&Tok::Colon, "after `box`")?;
                    let mut values = Vec::new();
                    while !cur.at_end() {
                        let span = cur.span();
                        let negative = cur.eat(&Tok::Minus);
                        match cur.next() {
                            Some(Tok::Number(v)) => {
                                values.push(if negative { -v.clone() } else { v.clone() })
                            }
                            _ => return Err(err(span, "expected a number in `box`")),
                        }
                    }
                    if values.len() != 2 * names.dim {
                        return Err(err(
                            d.span,
                            format!(
                                "box needs {} bounds for dimension {}, got {}",
                                2 * names.dim,
                                names.dim,
                                values.len()
                            ),
                        ));
                    }
                    Ok(values.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect())
                })();
                match result {
                    Ok(b) => {
                        if domain_box.replace(b).is_some() {
                            diags.push(err(d.span, "duplicate `box` declaration"));
                        }
                    }
                    Err(e) => diags.push(e),
                }
            }
            other => diags.push(err(d.span, format!("unknown declaration `{other}`"))),
        }
    }

    let sys = PDESystem {
        name,
        dim: names.dim,
        coords: names.coords,
        unknowns: names.unknowns,
        coeffs: names.coeffs,
        equations,
        gamma,
        traces,
        mh,
        domain_box,
    };
    diags.extend(validate_system(&sys));
    if diags.iter().any(|d| d.severity == Severity::Error) {
        Err(diags)
    } else {
        Ok(sys)
    }
}

/// Parse a standalone expression against a system's name tables, with the
/// extended atom set (γ, ω, ψ/χ and trace jets) enabled. Used to round-trip
/// rendered certificates and junction conditions.
pub fn parse_expr_extended(text: &str, sys: &PDESystem) -> Result<Expr, Vec<ParseDiagnostic>> {
    let toks = lex(text).map_err(|(span, msg)| vec![err(span, msg)])?;
    let names = Names {
        dim: sys.dim,
        coords: sys.coords.clone(),
        unknowns: sys.unknowns.clone(),
        coeffs: sys.coeffs.clone(),
    };
    let end = toks.last().map(|t| t.span).unwrap_or(Span { line: 1, col: 1 });
    parse_expr_in(&toks, end, &names, ExprMode::Extended).map_err(|e| vec![e])
}
