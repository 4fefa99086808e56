//! A small recursive-descent checker for the DOT language, written from the
//! published grammar (graph, stmt_list, node/edge/attr statements, attr
//! lists, subgraphs, quoted and bare identifiers). Used as an independent
//! syntax oracle for emitted graphs; it validates structure and rejects
//! anything outside the grammar.

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Equals,
    DirectedEdge,
    UndirectedEdge,
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '{' => {
                tokens.push(Token::LBrace);
                i += 1;
            }
            '}' => {
                tokens.push(Token::RBrace);
                i += 1;
            }
            '[' => {
                tokens.push(Token::LBracket);
                i += 1;
            }
            ']' => {
                tokens.push(Token::RBracket);
                i += 1;
            }
            ';' => {
                tokens.push(Token::Semi);
                i += 1;
            }
            ',' => {
                tokens.push(Token::Comma);
                i += 1;
            }
            '=' => {
                tokens.push(Token::Equals);
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&'>') {
                    tokens.push(Token::DirectedEdge);
                    i += 2;
                } else if bytes.get(i + 1) == Some(&'-') {
                    tokens.push(Token::UndirectedEdge);
                    i += 2;
                } else {
                    // possibly a negative numeral
                    let (ident, next) = read_numeral(&bytes, i)?;
                    tokens.push(Token::Ident(ident));
                    i = next;
                }
            }
            '"' => {
                let mut ident = String::new();
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err("unterminated quoted string".into()),
                        Some('\\') => {
                            match bytes.get(i + 1) {
                                Some(&esc) => ident.push(esc),
                                None => return Err("dangling escape".into()),
                            }
                            i += 2;
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            ident.push(ch);
                            i += 1;
                        }
                    }
                }
                tokens.push(Token::Ident(ident));
            }
            '/' if bytes.get(i + 1) == Some(&'/') => {
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_')
                {
                    i += 1;
                }
                tokens.push(Token::Ident(bytes[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() || c == '.' => {
                let (ident, next) = read_numeral(&bytes, i)?;
                tokens.push(Token::Ident(ident));
                i = next;
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(tokens)
}

fn read_numeral(bytes: &[char], mut i: usize) -> Result<(String, usize), String> {
    let start = i;
    if bytes[i] == '-' {
        i += 1;
    }
    let mut seen_digit = false;
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
        seen_digit |= bytes[i].is_ascii_digit();
        i += 1;
    }
    if !seen_digit {
        return Err("bare `-` is not a DOT token".into());
    }
    Ok((bytes[start..i].iter().collect(), i))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    directed: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: &Token) -> Result<(), String> {
        match self.next() {
            Some(ref t) if t == token => Ok(()),
            other => Err(format!("expected {token:?}, got {other:?}")),
        }
    }

    fn ident(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Token::Ident(s)) => Ok(s),
            other => Err(format!("expected identifier, got {other:?}")),
        }
    }

    /// graph : ('graph' | 'digraph') [ID] '{' stmt_list '}'
    fn graph(&mut self) -> Result<(), String> {
        let kind = self.ident()?;
        self.directed = match kind.as_str() {
            "digraph" => true,
            "graph" => false,
            other => return Err(format!("expected graph/digraph, got `{other}`")),
        };
        if matches!(self.peek(), Some(Token::Ident(_))) {
            self.ident()?;
        }
        self.expect(&Token::LBrace)?;
        self.stmt_list()?;
        self.expect(&Token::RBrace)?;
        if self.pos != self.tokens.len() {
            return Err("trailing tokens after closing brace".into());
        }
        Ok(())
    }

    /// stmt_list : ( stmt [';'] )*
    fn stmt_list(&mut self) -> Result<(), String> {
        loop {
            match self.peek() {
                None | Some(Token::RBrace) => return Ok(()),
                Some(Token::Semi) => {
                    self.next();
                }
                _ => self.stmt()?,
            }
        }
    }

    /// stmt : ID '=' ID | attr_stmt | subgraph (edge_stmt...) | node/edge stmt
    fn stmt(&mut self) -> Result<(), String> {
        if matches!(self.peek(), Some(Token::LBrace)) {
            // anonymous subgraph, possibly the head of an edge statement
            self.subgraph_body()?;
            return self.edge_rhs_or_done();
        }
        let name = self.ident()?;
        match name.as_str() {
            "graph" | "node" | "edge" if matches!(self.peek(), Some(Token::LBracket)) => {
                return self.attr_lists();
            }
            "subgraph" => {
                if matches!(self.peek(), Some(Token::Ident(_))) {
                    self.ident()?;
                }
                self.expect(&Token::LBrace)?;
                self.stmt_list()?;
                self.expect(&Token::RBrace)?;
                return self.edge_rhs_or_done();
            }
            _ => {}
        }
        match self.peek() {
            // ID '=' ID
            Some(Token::Equals) => {
                self.next();
                self.ident()?;
                Ok(())
            }
            Some(Token::DirectedEdge) | Some(Token::UndirectedEdge) => self.edge_rhs_or_done(),
            Some(Token::LBracket) => self.attr_lists(),
            // bare node statement
            _ => Ok(()),
        }
    }

    fn subgraph_body(&mut self) -> Result<(), String> {
        self.expect(&Token::LBrace)?;
        self.stmt_list()?;
        self.expect(&Token::RBrace)
    }

    /// edgeRHS : (edgeop (node_id | subgraph))* [attr_list]
    fn edge_rhs_or_done(&mut self) -> Result<(), String> {
        let mut saw_edge = false;
        loop {
            match self.peek() {
                Some(Token::DirectedEdge) => {
                    if !self.directed {
                        return Err("-> inside an undirected graph".into());
                    }
                    self.next();
                    saw_edge = true;
                }
                Some(Token::UndirectedEdge) => {
                    if self.directed {
                        return Err("-- inside a directed graph".into());
                    }
                    self.next();
                    saw_edge = true;
                }
                Some(Token::LBracket) if saw_edge => return self.attr_lists(),
                _ => return Ok(()),
            }
            match self.peek() {
                Some(Token::Ident(_)) => {
                    self.ident()?;
                }
                Some(Token::LBrace) => self.subgraph_body()?,
                other => return Err(format!("edge target expected, got {other:?}")),
            }
        }
    }

    /// attr_list : ('[' [a_list] ']')+ where a_list : ID '=' ID [';' | ','] ...
    fn attr_lists(&mut self) -> Result<(), String> {
        while matches!(self.peek(), Some(Token::LBracket)) {
            self.next();
            loop {
                match self.peek() {
                    Some(Token::RBracket) => {
                        self.next();
                        break;
                    }
                    Some(Token::Ident(_)) => {
                        self.ident()?;
                        self.expect(&Token::Equals)?;
                        self.ident()?;
                        if matches!(self.peek(), Some(Token::Comma) | Some(Token::Semi)) {
                            self.next();
                        }
                    }
                    other => return Err(format!("attribute expected, got {other:?}")),
                }
            }
        }
        Ok(())
    }
}

/// Checks that `text` is a syntactically valid DOT graph.
pub fn check(text: &str) -> Result<(), String> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err("empty input".into());
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        directed: true,
    };
    parser.graph()
}

#[cfg(test)]
mod tests {
    use super::check;

    #[test]
    fn accepts_well_formed_graphs() {
        check("digraph g { a -> b; }").unwrap();
        check("digraph { \"a b\" [label=\"x\", color=\"#ff0000\"]; a -> b -> c [w=1]; }")
            .unwrap();
        check("digraph { { rank=same; a; b; } a -> b; }").unwrap();
        check("graph g { a -- b }").unwrap();
        check("digraph { subgraph cluster0 { x; } x -> y; }").unwrap();
        check("digraph { node [shape=box]; a [label=\"esc \\\" quote\"]; }").unwrap();
        check("digraph { a -> { b; c } }").unwrap();
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(check("").is_err());
        assert!(check("graph g { a -> b; }").is_err(), "-> in undirected");
        assert!(check("digraph g { a -- b; }").is_err(), "-- in directed");
        assert!(check("digraph g { a -> ; }").is_err());
        assert!(check("digraph g { a [unclosed; }").is_err());
        assert!(check("digraph g { a -> b").is_err(), "missing brace");
        assert!(check("digraph g { a = ; }").is_err());
        assert!(check("flowchart { a -> b }").is_err(), "not a DOT keyword");
        assert!(check("digraph g { a -> b } trailing").is_err());
        assert!(check("digraph { \"open -> b }").is_err(), "unterminated string");
    }
}
