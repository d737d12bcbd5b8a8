//! Per-line tokenizer for `.circ` sources.

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// Raw numeric text; validated by the parser.
    Number(String),
    Sym(char),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// 1-based character column.
    pub column: usize,
}

impl Token {
    pub fn text(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) | TokenKind::Number(s) => s.clone(),
            TokenKind::Sym(c) => c.to_string(),
        }
    }
}

/// Splits one line into tokens, dropping whitespace and `#` comments.
pub fn tokenize_line(line: &str) -> Vec<Token> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let column = i + 1;
        if ch == '#' {
            break;
        }
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        let starts_number = ch.is_ascii_digit()
            || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()));
        if starts_number {
            let start = i;
            while i < chars.len() {
                let c = chars[i];
                let exp_sign = (c == '+' || c == '-')
                    && matches!(chars[i - 1], 'e' | 'E')
                    && chars[start..i - 1]
                        .iter()
                        .all(|d| d.is_ascii_digit() || *d == '.');
                if c.is_ascii_alphanumeric() || c == '.' || c == '_' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let text: String = chars[start..i].iter().collect();
            // "2pi" is shorthand for 2·pi
            if let Some(prefix) = text.strip_suffix("pi").filter(|p| p.parse::<f64>().is_ok()) {
                tokens.push(Token {
                    kind: TokenKind::Number(prefix.to_string()),
                    column,
                });
                tokens.push(Token {
                    kind: TokenKind::Ident("pi".to_string()),
                    column: column + prefix.chars().count(),
                });
            } else {
                tokens.push(Token {
                    kind: TokenKind::Number(text),
                    column,
                });
            }
            continue;
        }
        tokens.push(Token {
            kind: TokenKind::Sym(ch),
            column,
        });
        i += 1;
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(line: &str) -> Vec<TokenKind> {
        tokenize_line(line).into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn splits_statement() {
        let toks = tokenize_line("in b exp(i*theta)  # comment");
        let texts: Vec<_> = toks.iter().map(Token::text).collect();
        assert_eq!(texts, ["in", "b", "exp", "(", "i", "*", "theta", ")"]);
        assert_eq!(toks[2].column, 6);
    }

    #[test]
    fn numbers_and_pi() {
        assert_eq!(
            kinds("2pi/3"),
            [
                TokenKind::Number("2".into()),
                TokenKind::Ident("pi".into()),
                TokenKind::Sym('/'),
                TokenKind::Number("3".into())
            ]
        );
        assert_eq!(kinds("1e-3"), [TokenKind::Number("1e-3".into())]);
        assert_eq!(kinds("1.2.3"), [TokenKind::Number("1.2.3".into())]);
        assert_eq!(kinds(".5"), [TokenKind::Number(".5".into())]);
        assert_eq!(
            kinds("-1"),
            [TokenKind::Sym('-'), TokenKind::Number("1".into())]
        );
    }

    #[test]
    fn columns_count_chars() {
        let toks = tokenize_line("  ζ %");
        assert_eq!(toks[0].kind, TokenKind::Sym('ζ'));
        assert_eq!(toks[0].column, 3);
        assert_eq!(toks[1].column, 5);
    }
}
