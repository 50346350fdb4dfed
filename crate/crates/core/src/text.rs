//! Text forms shared by the command line: groups `9,5`, elements `7` or
//! `(3,1)`, sets `{1,2,3}` and sequences `seq{1,1,3}`.

use crate::error::{Error, Result};
use crate::group::{make_group, GroupSpec};
use crate::set::{ElementSet, MultisetSequence};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_u64(s: &str) -> Result<u64> {
    let t = s.trim();
    t.parse().map_err(|_| perr(format!("not a nonnegative integer: {t:?}")))
}

pub fn parse_factors(s: &str) -> Result<Vec<u64>> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::EmptySpec);
    }
    t.split(',').map(parse_u64).collect()
}

pub fn parse_group(s: &str) -> Result<GroupSpec> {
    make_group(&parse_factors(s)?)
}

/// Split at commas that are not inside parentheses.
fn split_top(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(perr(format!("unbalanced ')' in {s:?}")));
                }
            }
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(perr(format!("unbalanced '(' in {s:?}")));
    }
    out.push(&s[start..]);
    Ok(out)
}

pub fn parse_element(g: &GroupSpec, s: &str) -> Result<usize> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let coords: Vec<u64> = inner.split(',').map(parse_u64).collect::<Result<_>>()?;
        return g.encode(&coords);
    }
    let idx = parse_u64(t)? as usize;
    g.check(idx)?;
    Ok(idx)
}

fn braced<'a>(s: &'a str, prefix: &str) -> Result<&'a str> {
    let t = s.trim();
    t.strip_prefix(prefix)
        .and_then(|r| r.trim_start().strip_prefix('{'))
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| perr(format!("expected {prefix}{{...}}, got {t:?}")))
}

fn parse_items(g: &GroupSpec, body: &str) -> Result<Vec<usize>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top(body)?
        .into_iter()
        .map(|e| parse_element(g, e))
        .collect()
}

pub fn parse_set(g: &GroupSpec, s: &str) -> Result<ElementSet> {
    let items = parse_items(g, braced(s, "")?)?;
    g.set_of(&items)
}

pub fn parse_sequence(g: &GroupSpec, s: &str) -> Result<MultisetSequence> {
    let items = parse_items(g, braced(s, "seq")?)?;
    MultisetSequence::from_items(g.order(), &items)
}

/// A set or a sequence, told apart by the `seq` prefix.
pub fn parse_items_any(g: &GroupSpec, s: &str) -> Result<MultisetSequence> {
    if s.trim_start().starts_with("seq") {
        parse_sequence(g, s)
    } else {
        Ok(MultisetSequence::from_set(&parse_set(g, s)?))
    }
}

pub fn format_element(g: &GroupSpec, x: usize) -> String {
    if g.factors().len() == 1 {
        return x.to_string();
    }
    let parts: Vec<String> = g.decode(x).iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

pub fn format_set(g: &GroupSpec, s: &ElementSet) -> String {
    let parts: Vec<String> = s.iter().map(|x| format_element(g, x)).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn format_sequence(g: &GroupSpec, s: &MultisetSequence) -> String {
    let parts: Vec<String> = s.items().into_iter().map(|x| format_element(g, x)).collect();
    format!("seq{{{}}}", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups() {
        assert_eq!(parse_group("9,5").unwrap().order(), 45);
        assert_eq!(parse_group(" 11 ").unwrap().order(), 11);
        assert_eq!(parse_group("").unwrap_err(), Error::EmptySpec);
        assert!(matches!(parse_group("9,x"), Err(Error::Parse(_))));
        assert_eq!(parse_group("1").unwrap_err(), Error::FactorTooSmall(1));
    }

    #[test]
    fn elements_and_sets() {
        let g = parse_group("9,5").unwrap();
        assert_eq!(parse_element(&g, "(3,1)").unwrap(), 12);
        assert_eq!(parse_element(&g, "12").unwrap(), 12);
        assert!(parse_element(&g, "(9,0)").is_err());
        assert!(parse_element(&g, "45").is_err());
        let s = parse_set(&g, "{(0,0), (1,0)}").unwrap();
        assert_eq!(s.to_vec(), vec![0, 1]);
        assert_eq!(format_set(&g, &s), "{(0,0),(1,0)}");
        assert!(parse_set(&g, "{(0,0}").is_err());
        assert!(parse_set(&g, "{}").unwrap().is_empty());
    }

    #[test]
    fn sequences() {
        let g = parse_group("11").unwrap();
        let q = parse_sequence(&g, "seq{1,1,3}").unwrap();
        assert_eq!(q.items(), vec![1, 1, 3]);
        assert_eq!(format_sequence(&g, &q), "seq{1,1,3}");
        assert_eq!(parse_items_any(&g, "{3,1}").unwrap().items(), vec![1, 3]);
        assert_eq!(parse_items_any(&g, "seq{3,3}").unwrap().len(), 2);
        assert!(parse_sequence(&g, "{1}").is_err());
    }
}
