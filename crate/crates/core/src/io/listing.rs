use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{canonicalize, ClassifiedPattern, Item, Pattern, PatternClass};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ListingFormat {
    #[default]
    Tsv,
    Jsonl,
}

impl std::str::FromStr for ListingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(ListingFormat::Tsv),
            "jsonl" => Ok(ListingFormat::Jsonl),
            other => Err(Error::InvalidParams(format!(
                "unknown format {other:?} (expected tsv or jsonl)"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    pattern: Vec<Vec<Item>>,
    wes: f64,
    class: PatternClass,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Writes patterns ordered by class (FS, SFS, PFS, LFS), then pattern.
pub fn write_patterns(
    patterns: &[ClassifiedPattern],
    format: ListingFormat,
    mut out: impl Write,
) -> Result<()> {
    let mut rows: Vec<&ClassifiedPattern> = patterns.iter().collect();
    rows.sort_by(|a, b| {
        a.class
            .cmp(&b.class)
            .then_with(|| a.pattern.cmp(&b.pattern))
    });
    for row in rows {
        match format {
            ListingFormat::Tsv => writeln!(out, "{}\t{:.6}\t{}", row.pattern, row.wes, row.class)?,
            ListingFormat::Jsonl => {
                let json = JsonRow {
                    pattern: row.pattern.itemsets().to_vec(),
                    wes: round6(row.wes),
                    class: row.class,
                };
                serde_json::to_writer(&mut out, &json)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Reads a listing back; lines starting with `#` are skipped.
pub fn parse_patterns(
    reader: impl BufRead,
    format: ListingFormat,
) -> Result<Vec<ClassifiedPattern>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let row = match format {
            ListingFormat::Tsv => {
                let fields: Vec<&str> = body.split('\t').collect();
                let [pattern, wes, class] = fields[..] else {
                    return Err(Error::parse(lineno, "expected pattern<TAB>wes<TAB>class"));
                };
                ClassifiedPattern {
                    pattern: pattern
                        .parse::<Pattern>()
                        .map_err(|e| Error::parse(lineno, e.to_string()))?,
                    wes: wes
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("invalid wes {wes:?}")))?,
                    class: class
                        .parse()
                        .map_err(|e: Error| Error::parse(lineno, e.to_string()))?,
                }
            }
            ListingFormat::Jsonl => {
                let json: JsonRow =
                    serde_json::from_str(body).map_err(|e| Error::parse(lineno, e.to_string()))?;
                ClassifiedPattern {
                    pattern: canonicalize(json.pattern)
                        .map_err(|e| Error::parse(lineno, e.to_string()))?,
                    wes: json.wes,
                    class: json.class,
                }
            }
        };
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_util::pat;

    fn sample() -> Vec<ClassifiedPattern> {
        vec![
            ClassifiedPattern {
                pattern: pat("(c)(a)"),
                wes: 0.9945,
                class: PatternClass::Pfs,
            },
            ClassifiedPattern {
                pattern: pat("(a c)"),
                wes: 1.02,
                class: PatternClass::Sfs,
            },
            ClassifiedPattern {
                pattern: pat("(b)"),
                wes: 1.4,
                class: PatternClass::Fs,
            },
            ClassifiedPattern {
                pattern: pat("(a)"),
                wes: 2.24,
                class: PatternClass::Fs,
            },
        ]
    }

    fn render(format: ListingFormat) -> String {
        let mut buf = Vec::new();
        write_patterns(&sample(), format, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn tsv_layout_and_order() {
        assert_eq!(
            render(ListingFormat::Tsv),
            "(a)\t2.240000\tFS\n(b)\t1.400000\tFS\n(a c)\t1.020000\tSFS\n(c)(a)\t0.994500\tPFS\n"
        );
    }

    #[test]
    fn jsonl_layout() {
        let text = render(ListingFormat::Jsonl);
        let first = text.lines().next().unwrap();
        assert_eq!(first, r#"{"pattern":[["a"]],"wes":2.24,"class":"FS"}"#);
        assert!(text.contains(r#"{"pattern":[["a","c"]],"wes":1.02,"class":"SFS"}"#));
    }

    #[test]
    fn round_trips() {
        for format in [ListingFormat::Tsv, ListingFormat::Jsonl] {
            let text = render(format);
            let parsed = parse_patterns(text.as_bytes(), format).unwrap();
            let mut again = Vec::new();
            write_patterns(&parsed, format, &mut again).unwrap();
            assert_eq!(String::from_utf8(again).unwrap(), text);
        }
    }
}
