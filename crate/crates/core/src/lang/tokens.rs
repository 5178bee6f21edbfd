//! Token accounting used for compactness comparisons.
//!
//! A maximal run of identifier characters (ASCII letters, digits, `_`)
//! counts as one token; every other non-whitespace character counts as one.

use super::lexer::is_ident_char;

pub fn count_tokens(source: &str) -> usize {
    let mut count = 0;
    let mut in_word = false;
    for c in source.chars() {
        if is_ident_char(c) {
            if !in_word {
                count += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !c.is_whitespace() {
                count += 1;
            }
        }
    }
    count
}
