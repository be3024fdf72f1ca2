//! Recursive-descent parser for cell sources.
//!
//! ```text
//! program := stmt*
//! stmt    := IDENT "=" expr | expr
//! expr    := call | IDENT | literal
//! call    := IDENT "(" [expr ("," expr)*] ")"
//! literal := string | number | "true" | "false" | "[" [expr ("," expr)*] "]"
//! ```
//!
//! Statements are separated by whitespace or newlines; `#` starts a comment
//! that runs to the end of the line.

use crate::error::{Error, Result};

use super::ast::{Expr, Literal, Pos, Program, Stmt};
use super::lexer::{tokenize, Tok};

pub fn parse_cell(source: &str) -> Result<Program> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, at: 0 };
    let mut stmts = Vec::new();
    while parser.peek() != &Tok::Eof {
        stmts.push(parser.stmt()?);
    }
    Ok(Program { stmts })
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let item = self.tokens[self.at].clone();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        item
    }

    fn unexpected(&self, wanted: &str) -> Error {
        let pos = self.pos();
        Error::Syntax {
            line: pos.line,
            column: pos.column,
            reason: format!("expected {wanted}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<()> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn stmt(&mut self) -> Result<Stmt> {
        if let (Tok::Ident(name), Tok::Assign) = (self.peek(), self.peek_at(1)) {
            let name = name.clone();
            let pos = self.pos();
            if matches!(name.as_str(), "true" | "false") {
                return Err(Error::Syntax {
                    line: pos.line,
                    column: pos.column,
                    reason: format!("cannot assign to `{name}`"),
                });
            }
            self.bump();
            self.bump();
            let expr = self.expr()?;
            return Ok(Stmt::Assign { name, expr, pos });
        }
        Ok(Stmt::Expr { expr: self.expr()? })
    }

    fn expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => return Ok(Expr::Literal { value: Literal::Bool(true), pos }),
                    "false" => return Ok(Expr::Literal { value: Literal::Bool(false), pos }),
                    _ => {}
                }
                if self.peek() == &Tok::LParen {
                    self.bump();
                    let args = self.sequence(Tok::RParen, "`)`")?;
                    Ok(Expr::Call { name, args, pos })
                } else {
                    Ok(Expr::Ident { name, pos })
                }
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Literal { value: Literal::Str(s), pos })
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Literal { value: Literal::Int(n), pos })
            }
            Tok::Float(x) => {
                self.bump();
                Ok(Expr::Literal { value: Literal::Float(x), pos })
            }
            Tok::LBracket => {
                self.bump();
                let items = self.sequence(Tok::RBracket, "`]`")?;
                Ok(Expr::List { items, pos })
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    /// Comma-separated expressions up to and including `close`.
    fn sequence(&mut self, close: Tok, close_name: &str) -> Result<Vec<Expr>> {
        let mut items = Vec::new();
        if self.peek() == &close {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.peek() == &Tok::Comma {
                self.bump();
                continue;
            }
            self.expect(close.clone(), &format!("`,` or {close_name}"))?;
            return Ok(items);
        }
    }
}
