use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::{Item, WeightTable};

use super::content;

pub fn parse_weights(reader: impl BufRead) -> Result<WeightTable> {
    let mut table = WeightTable::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = content(&line);
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split_whitespace();
        let (Some(name), Some(weight), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(
                lineno,
                format!("expected \"item weight\", got {body:?}"),
            ));
        };
        let item = Item::new(name).map_err(|e| Error::parse(lineno, e.to_string()))?;
        let weight: f64 = weight
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid weight {weight:?}")))?;
        if table.contains(item) {
            return Err(Error::parse(
                lineno,
                format!("duplicate weight for item {item}"),
            ));
        }
        table
            .insert(item, weight)
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
    }
    Ok(table)
}

pub fn parse_weights_str(text: &str) -> Result<WeightTable> {
    parse_weights(text.as_bytes())
}

pub fn write_weights(table: &WeightTable, mut out: impl Write) -> Result<()> {
    for (item, w) in table.iter() {
        writeln!(out, "{item} {w}")?;
    }
    Ok(())
}

pub fn write_weights_string(table: &WeightTable) -> String {
    let mut buf = Vec::new();
    write_weights(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("weight output is UTF-8")
}
