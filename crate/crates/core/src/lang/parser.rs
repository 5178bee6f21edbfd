use super::ast::{Expr, Graph, Node, ParamSpec, Scalar, ValueType};
use super::diag::{DiagCode, Diagnostic};
use super::lexer::{lex_line, Tok};
use super::registry::Registry;
use super::validate::{validate_with_lines, LineMap};

/// Parses and validates PCG source. Never panics; on failure every problem
/// found is returned as a diagnostic.
pub fn parse_pcg(source: &str) -> Result<Graph, Vec<Diagnostic>> {
    parse_pcg_with(source, Registry::standard())
}

pub fn parse_pcg_with(source: &str, registry: &Registry) -> Result<Graph, Vec<Diagnostic>> {
    let (graph, lines, mut diags) = parse_unvalidated(source, registry);
    diags.extend(validate_with_lines(&graph, &lines, registry));
    if diags.iter().any(Diagnostic::is_error) {
        diags.sort_by_key(|d| d.line);
        Err(diags)
    } else {
        Ok(graph)
    }
}

/// Builds a graph from every well-formed statement, collecting lexical and
/// syntactic diagnostics for the rest. No semantic checks are run.
pub fn parse_unvalidated(source: &str, registry: &Registry) -> (Graph, LineMap, Vec<Diagnostic>) {
    let mut graph = Graph::default();
    let mut lines = LineMap::default();
    let mut diags = Vec::new();
    let mut last_line = 0;
    for (idx, text) in source.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let toks = match lex_line(text) {
            Ok(t) => t,
            Err(msg) => {
                diags.push(Diagnostic::error(DiagCode::LexError, line_no, msg));
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser { toks: &toks, pos: 0 };
        match p.statement(registry) {
            Ok(Stmt::Input(spec)) => {
                graph.params.push(spec);
                lines.params.push(line_no);
            }
            Ok(Stmt::Node(node)) => {
                graph.nodes.push(node);
                lines.nodes.push(line_no);
            }
            Ok(Stmt::Output(expr)) => {
                if graph.output.is_some() {
                    diags.push(Diagnostic::error(
                        DiagCode::DuplicateOutput,
                        line_no,
                        "output is declared more than once",
                    ));
                } else {
                    graph.output = Some(expr);
                    lines.output = Some(line_no);
                }
            }
            Err(msg) => diags.push(Diagnostic::error(DiagCode::SyntaxError, line_no, msg)),
        }
    }
    lines.last = last_line.max(1);
    (graph, lines, diags)
}

enum Stmt {
    Input(ParamSpec),
    Node(Node),
    Output(Expr),
}

struct LineParser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

type PResult<T> = Result<T, String>;

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + offset)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok) -> PResult<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(format!("expected {}, found {}", want.describe(), t.describe())),
            None => Err(format!("expected {}, found end of line", want.describe())),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<&'a str> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(t) => Err(format!("expected {what}, found {}", t.describe())),
            None => Err(format!("expected {what}, found end of line")),
        }
    }

    fn end(&mut self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(format!("unexpected {} after statement", t.describe())),
        }
    }

    fn statement(&mut self, registry: &Registry) -> PResult<Stmt> {
        let head = self.ident("a statement")?;
        if head == "input" && matches!(self.peek(), Some(Tok::Ident(_))) {
            return self.input_decl().map(Stmt::Input);
        }
        if head == "output" && self.peek() == Some(&Tok::Eq) {
            self.next();
            let expr = self.expr()?;
            if !matches!(expr, Expr::Ref { .. }) {
                return Err("output must reference a node".into());
            }
            self.end()?;
            return Ok(Stmt::Output(expr));
        }
        if is_reserved(head) {
            return Err(format!("`{head}` is a reserved word"));
        }
        self.expect(&Tok::Eq)?;
        let kind_name = self.ident("a node kind")?;
        self.expect(&Tok::LParen)?;
        let args = self.args()?;
        self.expect(&Tok::RParen)?;
        self.end()?;
        if kind_name == "input" || kind_name == "output" {
            return Err(format!("`{kind_name}` cannot be used as a node kind"));
        }
        let kind = registry.get(kind_name);
        let mut node = Node::new(head, kind.map_or(kind_name, |k| k.name));
        let mut positional = 0usize;
        for (name, value) in args {
            match name {
                Some(name) => {
                    let variadic = kind
                        .and_then(|k| k.input(name))
                        .is_some_and(|(_, p)| p.variadic);
                    let value = if variadic && !matches!(value, Expr::List { .. }) {
                        Expr::List { list: vec![value] }
                    } else {
                        value
                    };
                    if node.args.insert(name.to_string(), value).is_some() {
                        return Err(format!("argument `{name}` is given more than once"));
                    }
                }
                None => {
                    let Some(kind) = kind else {
                        node.args.insert(format!("#{positional}"), value);
                        positional += 1;
                        continue;
                    };
                    let port = match kind.inputs.get(positional) {
                        Some(p) => p,
                        None => match kind.inputs.last() {
                            Some(p) if p.variadic => p,
                            _ => {
                                return Err(format!(
                                    "`{}` takes at most {} positional arguments",
                                    kind.name,
                                    kind.inputs.len()
                                ))
                            }
                        },
                    };
                    if port.variadic {
                        let slot = node
                            .args
                            .entry(port.name.to_string())
                            .or_insert_with(|| Expr::List { list: vec![] });
                        match slot {
                            Expr::List { list } => list.push(value),
                            _ => unreachable!("variadic ports always hold lists"),
                        }
                    } else {
                        if node.args.contains_key(port.name) {
                            return Err(format!("argument `{}` is given more than once", port.name));
                        }
                        node.args.insert(port.name.to_string(), value);
                    }
                    positional += 1;
                }
            }
        }
        Ok(Stmt::Node(node))
    }

    fn input_decl(&mut self) -> PResult<ParamSpec> {
        let name = self.ident("a parameter name")?;
        if is_reserved(name) {
            return Err(format!("`{name}` is a reserved word"));
        }
        self.expect(&Tok::Colon)?;
        let ty_name = self.ident("a parameter type")?;
        let ty = ValueType::from_name(ty_name)
            .filter(|t| t.is_scalar_param())
            .ok_or_else(|| format!("parameter type must be float, int or bool, found `{ty_name}`"))?;
        self.expect(&Tok::Eq)?;
        let raw = self.scalar()?;
        let default = raw.coerce(ty).unwrap_or(raw);
        let mut range = None;
        if let Some(Tok::Ident(kw)) = self.peek() {
            if kw == "range" {
                self.next();
                let lo = self.number()?;
                self.expect(&Tok::DotDot)?;
                let hi = self.number()?;
                range = Some([lo, hi]);
            }
        }
        self.end()?;
        Ok(ParamSpec {
            name: name.to_string(),
            ty,
            default,
            range,
        })
    }

    fn scalar(&mut self) -> PResult<Scalar> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "true" || s == "false" => {
                self.next();
                Ok(Scalar::Bool(s == "true"))
            }
            _ => match self.signed_number()? {
                Expr::Int(i) => Ok(Scalar::Int(i)),
                Expr::Float(x) => Ok(Scalar::Float(x)),
                _ => unreachable!(),
            },
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match self.signed_number()? {
            Expr::Int(i) => Ok(i as f64),
            Expr::Float(x) => Ok(x),
            _ => unreachable!(),
        }
    }

    fn signed_number(&mut self) -> PResult<Expr> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.next();
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Int(i)) => Ok(Expr::Int(if neg { -i } else { *i })),
            Some(Tok::Float(x)) => Ok(Expr::Float(if neg { -x } else { *x })),
            Some(t) => Err(format!("expected a number, found {}", t.describe())),
            None => Err("expected a number, found end of line".into()),
        }
    }

    fn args(&mut self) -> PResult<Vec<(Option<&'a str>, Expr)>> {
        let mut out: Vec<(Option<&'a str>, Expr)> = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            let named = match (self.peek(), self.peek_at(1)) {
                (Some(Tok::Ident(name)), Some(Tok::Eq)) => {
                    self.pos += 2;
                    Some(name.as_str())
                }
                _ => None,
            };
            if named.is_none() && out.iter().any(|(n, _)| n.is_some()) {
                return Err("positional argument after a named argument".into());
            }
            out.push((named, self.expr()?));
            match self.peek() {
                Some(Tok::Comma) => {
                    self.next();
                }
                _ => return Ok(out),
            }
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        match self.peek() {
            Some(Tok::Minus | Tok::Int(_) | Tok::Float(_)) => self.signed_number(),
            Some(Tok::Ident(s)) if s == "true" || s == "false" => {
                self.next();
                Ok(Expr::Bool(s == "true"))
            }
            Some(Tok::Ident(name)) => {
                self.next();
                let port = if self.peek() == Some(&Tok::Dot) {
                    self.next();
                    Some(self.ident("a port name")?.to_string())
                } else {
                    None
                };
                Ok(Expr::Ref {
                    name: name.clone(),
                    port,
                })
            }
            Some(Tok::LParen) => {
                self.next();
                let x = self.expr()?;
                self.expect(&Tok::Comma)?;
                let y = self.expr()?;
                self.expect(&Tok::Comma)?;
                let z = self.expr()?;
                self.expect(&Tok::RParen)?;
                if [&x, &y, &z]
                    .iter()
                    .any(|e| matches!(e, Expr::Vec3 { .. } | Expr::List { .. }))
                {
                    return Err("vector components must be scalars".into());
                }
                Ok(Expr::vec3(x, y, z))
            }
            Some(Tok::LBracket) => {
                self.next();
                let mut list = Vec::new();
                if self.peek() != Some(&Tok::RBracket) {
                    loop {
                        list.push(self.expr()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RBracket)?;
                Ok(Expr::List { list })
            }
            Some(t) => Err(format!("expected an expression, found {}", t.describe())),
            None => Err("expected an expression, found end of line".into()),
        }
    }
}

pub(crate) fn is_reserved(word: &str) -> bool {
    matches!(word, "input" | "output" | "true" | "false")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::diag::DiagCode;

    const MINIMAL: &str =
        "input h: float = 1.0\nc = cube()\nout = scale(geometry=c, s=(1,1,h))\noutput = out\n";

    #[test]
    fn parses_minimal_program() {
        let g = parse_pcg(MINIMAL).unwrap();
        assert_eq!(g.params.len(), 1);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.output, Some(Expr::reference("out")));
        assert_eq!(
            g.nodes[1].args["s"],
            Expr::vec3(Expr::Int(1), Expr::Int(1), Expr::reference("h"))
        );
    }

    #[test]
    fn unresolved_output_reports_one_error_on_its_line() {
        let src = "c = cube()\noutput = missing_id\n";
        let diags = parse_pcg(src).unwrap_err();
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].code, DiagCode::UnresolvedReference);
        assert_eq!(diags[0].line, 2);
    }

    #[test]
    fn positional_args_map_to_ports_in_order() {
        let g = parse_pcg("c = cylinder(0.5, 3)\nj = join(c, c)\noutput = j").unwrap();
        let cyl = &g.nodes[0];
        assert_eq!(cyl.args["radius"], Expr::Float(0.5));
        assert_eq!(cyl.args["depth"], Expr::Int(3));
        assert_eq!(
            g.nodes[1].args["geometry"],
            Expr::List {
                list: vec![Expr::reference("c"), Expr::reference("c")]
            }
        );
    }

    #[test]
    fn named_then_positional_is_a_syntax_error() {
        let diags = parse_pcg("c = cylinder(radius=1, 2)\noutput = c").unwrap_err();
        assert_eq!(diags[0].code, DiagCode::SyntaxError);
        assert_eq!(diags[0].line, 1);
    }

    #[test]
    fn lexer_and_syntax_errors_keep_going() {
        let src = "a = cube() $\nb = cube(\nc = cube()\noutput = c\n";
        let diags = parse_pcg(src).unwrap_err();
        let codes: Vec<_> = diags.iter().map(|d| (d.line, d.code)).collect();
        assert_eq!(
            codes,
            vec![(1, DiagCode::LexError), (2, DiagCode::SyntaxError)]
        );
    }

    #[test]
    fn kind_names_are_case_insensitive_and_canonicalized() {
        let g = parse_pcg("q = Quadrilateral(width=2, height=1)\nf = fill(q)\noutput = f").unwrap();
        assert_eq!(g.nodes[0].kind, "rectangle");
    }

    #[test]
    fn input_ranges_and_bools() {
        let g = parse_pcg(
            "input w: float = 2 range 0.5..4\ninput on: bool = false\nc = cube()\ns = switch(flag=on, on_true=c)\noutput = s",
        )
        .unwrap();
        assert_eq!(g.params[0].default, Scalar::Float(2.0));
        assert_eq!(g.params[0].range, Some([0.5, 4.0]));
        assert_eq!(g.params[1].default, Scalar::Bool(false));
    }

    #[test]
    fn default_outside_range_is_invalid() {
        let diags = parse_pcg("input w: float = 9 range 0..4\nc = cube()\noutput = c").unwrap_err();
        assert_eq!(diags[0].code, DiagCode::InvalidParam);
    }
}
