use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::{Event, Item, UncertainDatabase, UncertainSequence};

use super::content;

pub fn parse_usf(reader: impl BufRead) -> Result<UncertainDatabase> {
    let mut sequences = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = content(&line);
        if body.is_empty() {
            continue;
        }
        let (sid, events) = match body.split_once('|') {
            Some((id, rest)) => {
                let sid = id.trim().parse::<u64>().map_err(|_| {
                    Error::parse(lineno, format!("invalid sequence id {:?}", id.trim()))
                })?;
                (sid, rest)
            }
            None => (sequences.len() as u64 + 1, body),
        };
        if !seen.insert(sid) {
            return Err(Error::parse(lineno, format!("duplicate sequence id {sid}")));
        }
        let events = parse_events(events).map_err(|m| Error::parse(lineno, m))?;
        let seq =
            UncertainSequence::new(sid, events).map_err(|e| Error::parse(lineno, e.to_string()))?;
        sequences.push(seq);
    }
    Ok(UncertainDatabase::new(sequences))
}

pub fn parse_usf_str(text: &str) -> Result<UncertainDatabase> {
    parse_usf(text.as_bytes())
}

fn parse_events(text: &str) -> std::result::Result<Vec<Event>, String> {
    let mut events = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| format!("expected '(' at {rest:?}"))?;
        let close = body.find(')').ok_or("unclosed event")?;
        let mut entries = Vec::new();
        for entry in body[..close].split(',') {
            let (name, prob) = entry
                .split_once(':')
                .ok_or_else(|| format!("expected item:prob, got {:?}", entry.trim()))?;
            let item = Item::new(name.trim()).map_err(|e| e.to_string())?;
            let p: f64 = prob
                .trim()
                .parse()
                .map_err(|_| format!("invalid probability {:?}", prob.trim()))?;
            entries.push((item, p));
        }
        events.push(Event::new(entries).map_err(|e| e.to_string())?);
        rest = body[close + 1..].trim_start();
    }
    if events.is_empty() {
        return Err("sequence has no events".into());
    }
    Ok(events)
}

/// Writes one line per sequence with its id; items sorted within events.
pub fn write_usf(db: &UncertainDatabase, mut out: impl Write) -> Result<()> {
    for seq in db {
        write!(out, "{}|", seq.sid)?;
        for event in seq.events() {
            out.write_all(b"(")?;
            for (k, (item, p)) in event.iter().enumerate() {
                if k > 0 {
                    out.write_all(b",")?;
                }
                write!(out, "{item}:{p}")?;
            }
            out.write_all(b")")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_usf_string(db: &UncertainDatabase) -> String {
    let mut buf = Vec::new();
    write_usf(db, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("USF output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::test_util::item;

    #[test]
    fn parses_first_sequence() {
        let db = parse_usf_str("(a:0.9,c:0.6)(a:0.7)(b:0.3)(d:0.7)").unwrap();
        let s = &db.sequences()[0];
        assert_eq!(s.sid, 1);
        assert_eq!(s.len(), 4);
        assert_eq!(s.events()[0].prob(item("c")), Some(0.6));
        assert_eq!(s.events()[3].prob(item("d")), Some(0.7));
    }

    #[test]
    fn accepts_unsorted_items() {
        let db = parse_usf_str("8|(c:0.6,a:0.4)(c:0.8)(a:0.6)(f:0.5)(g:0.4,c:0.7)").unwrap();
        let s = &db.sequences()[0];
        assert_eq!(s.sid, 8);
        let first: Vec<_> = s.events()[0].iter().collect();
        assert_eq!(first, vec![(item("a"), 0.4), (item("c"), 0.6)]);
        assert_eq!(
            db.sequences(),
            fixtures::delta1().sequences()[1..2].as_ref()
        );
    }

    #[test]
    fn rejects_bad_input_with_line_numbers() {
        for (text, line) in [
            ("(a:1.2)", 1),
            ("# c\n(a:0.5)\n(a:0)", 3),
            ("(a:0.5,a:0.6)", 1),
            ("(a:0.5", 1),
            ("(a 0.5)", 1),
            ("1|(a:0.5)\n1|(b:0.5)", 2),
        ] {
            match parse_usf_str(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn numbering_skips_comments_and_blanks() {
        let db = parse_usf_str("# x\n\n(a:0.5)\n(b:0.5)\n").unwrap();
        let ids: Vec<_> = db.iter().map(|s| s.sid).collect();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn round_trip() {
        let db = fixtures::full_db();
        assert_eq!(parse_usf_str(&write_usf_string(&db)).unwrap(), db);
    }
}
