//! Text format:
//!
//! ```text
//! config dim=2 norm2=1 count=6 label=hexagon
//! 1 0
//! 1/2 0+1/2*sqrt(3)
//! ...
//! ```
//!
//! `ambient=<a>` may be added to the header when the points live in a
//! `dim`-dimensional subspace of a larger coordinate space. `label=` takes the
//! rest of the header line. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use super::{ConfigError, Point, PointConfig};
use crate::exactnum::{parse_scalar, NumError, QuadExt};

/// A whitespace-separated token with its 1-based position.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub line: usize,
    pub column: usize,
    pub text: &'a str,
}

/// Non-comment lines, each split into tokens.
pub(crate) fn lines(text: &str) -> Vec<(usize, &str, Vec<Token<'_>>)> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut start = None;
        for (i, c) in body.char_indices().chain([(body.len(), ' ')]) {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    toks.push(Token { line: ln + 1, column: body[..s].chars().count() + 1, text: &body[s..i] });
                    start = None;
                }
                _ => {}
            }
        }
        if !toks.is_empty() {
            out.push((ln + 1, body, toks));
        }
    }
    out
}

pub(crate) fn scalar_at(tok: &Token<'_>) -> Result<QuadExt, ConfigError> {
    parse_scalar(tok.text).map_err(|e| match e {
        NumError::Parse { message, column } => {
            ConfigError::Parse { line: tok.line, column: tok.column + column.saturating_sub(1), message }
        }
        other => ConfigError::Parse { line: tok.line, column: tok.column, message: other.to_string() },
    })
}

pub(crate) fn parse_err(line: usize, column: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, column, message: message.into() }
}

pub(crate) fn usize_at(tok: &Token<'_>, value: &str, offset: usize) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| parse_err(tok.line, tok.column + offset, format!("expected a non-negative integer, got {value:?}")))
}

pub fn parse_config(text: &str) -> Result<PointConfig, ConfigError> {
    let all = lines(text);
    let Some((hline, hbody, htoks)) = all.first() else {
        return Err(parse_err(1, 1, "missing config header"));
    };
    if htoks[0].text != "config" {
        return Err(parse_err(*hline, htoks[0].column, "header must start with 'config'"));
    }
    let (mut dim, mut ambient, mut norm2, mut count, mut label) = (None, None, None, None, String::new());
    for tok in &htoks[1..] {
        let Some((key, value)) = tok.text.split_once('=') else {
            return Err(parse_err(tok.line, tok.column, format!("expected key=value, got {:?}", tok.text)));
        };
        let off = key.len() + 1;
        match key {
            "dim" => dim = Some(usize_at(tok, value, off)?),
            "ambient" => ambient = Some(usize_at(tok, value, off)?),
            "count" => count = Some(usize_at(tok, value, off)?),
            "norm2" => {
                let vt = Token { column: tok.column + off, text: value, ..*tok };
                norm2 = Some(scalar_at(&vt)?);
            }
            "label" => {
                let byte = hbody.char_indices().nth(tok.column - 1).map_or(0, |(b, _)| b);
                label = hbody[byte + off..].trim().to_string();
                break;
            }
            _ => return Err(parse_err(tok.line, tok.column, format!("unknown header key {key:?}"))),
        }
    }
    let missing = |k: &str| parse_err(*hline, 1, format!("header is missing {k}="));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let norm2 = norm2.ok_or_else(|| missing("norm2"))?;
    let count = count.ok_or_else(|| missing("count"))?;
    let width = ambient.unwrap_or(dim);
    let rows = &all[1..];
    if count == 0 || rows.is_empty() {
        return Err(parse_err(*hline, 1, "configuration has no points"));
    }
    if rows.len() != count {
        return Err(parse_err(rows.last().map_or(*hline, |r| r.0), 1, format!("count={count} but {} rows", rows.len())));
    }
    let mut points: Vec<Point> = Vec::with_capacity(count);
    for (ln, _, toks) in rows {
        if toks.len() != width {
            return Err(parse_err(*ln, 1, format!("expected {width} coordinates, got {}", toks.len())));
        }
        points.push(toks.iter().map(scalar_at).collect::<Result<_, _>>()?);
    }
    PointConfig::new(dim, ambient, points, norm2, label)
}

pub fn render_config(config: &PointConfig) -> String {
    let mut s = format!("config dim={}", config.dim());
    if config.ambient() != config.dim() {
        write!(s, " ambient={}", config.ambient()).unwrap();
    }
    writeln!(s, " norm2={} count={} label={}", config.norm2(), config.len(), config.label()).unwrap();
    for p in config.points() {
        let row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        writeln!(s, "{}", row.join(" ")).unwrap();
    }
    s
}

pub fn load_config(path: impl AsRef<Path>) -> Result<PointConfig, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}

pub fn save_config(config: &PointConfig, path: impl AsRef<Path>) -> Result<(), ConfigError> {
    std::fs::write(path, render_config(config))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{catalog, CATALOG_NAMES};

    #[test]
    fn round_trip_all_catalog_entries() {
        for name in CATALOG_NAMES {
            let c = catalog(name).unwrap();
            assert_eq!(parse_config(&render_config(&c)).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn file_round_trip() {
        let c = catalog("d4_min").unwrap();
        let path = std::env::temp_dir().join(format!("d4_{}.cfg", std::process::id()));
        save_config(&c, &path).unwrap();
        assert_eq!(load_config(&path).unwrap(), c);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn comments_and_labels_with_spaces() {
        let text = "# triangle-free\nconfig dim=1 norm2=1 count=2 label=two points on S^0\n1  # north\n-1\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.label(), "two points on S^0");
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn mismatched_norm_is_an_invariant_violation() {
        let text = "config dim=2 norm2=1 count=2 label=x\n1 0\n1 1\n";
        assert!(matches!(parse_config(text), Err(ConfigError::InvariantViolation(_))));
    }

    #[test]
    fn empty_point_list_is_a_parse_error() {
        let text = "config dim=2 norm2=1 count=0 label=x\n";
        assert!(matches!(parse_config(text), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let text = "config dim=2 norm2=1 count=2 label=x\n1 0\n0 1/x\n";
        match parse_config(text) {
            Err(ConfigError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 5)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_config("cfg dim=2"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(parse_config(""), Err(ConfigError::Parse { .. })));
    }
}
