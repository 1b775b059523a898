//! Element and set literals.
//!
//! Elements: a flat index `7` or a component tuple `(3,1)`.
//! Sets: `{0,1,4}`, `{(1,0),(0,1)}`, `{}` or a hex bitmask `0x33`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Element, FiniteAbelianGroup};
use crate::set::GroupSet;

pub fn parse_element(group: &Arc<FiniteAbelianGroup>, text: &str) -> Result<Element> {
    let s = text.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let comps = inner
            .split(',')
            .map(|c| c.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad component in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        return group.element_from_components(&comps);
    }
    let index = s.parse::<usize>().map_err(|_| Error::Parse(format!("bad element literal {s:?}")))?;
    group.element(index)
}

/// Splits on commas that are not inside parentheses.
fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced parentheses in {s:?}")));
                }
            }
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in {s:?}")));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

pub fn parse_set(group: &Arc<FiniteAbelianGroup>, text: &str) -> Result<GroupSet> {
    let s = text.trim();
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        return parse_hex(group, hex);
    }
    let inner = s
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| Error::Parse(format!("set literal must be {{...}} or 0x..., got {s:?}")))?;
    let mut out = GroupSet::empty(group);
    if inner.trim().is_empty() {
        return Ok(out);
    }
    for part in split_top_level(inner)? {
        out.insert(parse_element(group, part)?)?;
    }
    Ok(out)
}

fn parse_hex(group: &Arc<FiniteAbelianGroup>, hex: &str) -> Result<GroupSet> {
    let hex = hex.replace('_', "");
    if hex.is_empty() || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(Error::Parse(format!("bad hex bitmask 0x{hex}")));
    }
    let mut out = GroupSet::empty(group);
    for (pos, c) in hex.chars().rev().enumerate() {
        let nibble = c.to_digit(16).unwrap() as usize;
        for bit in 0..4 {
            if nibble >> bit & 1 == 1 {
                let idx = pos * 4 + bit;
                out.insert(group.element(idx)?)?;
            }
        }
    }
    Ok(out)
}
