//! Flat text checkpoint format.
//!
//! ```text
//! aqcast-checkpoint 1
//! <key> <value...>          header lines, any number
//! params <count>
//! <value>                   one parameter per line, visiting order
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every parameter bit for bit.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "aqcast-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut sink: W, header: &[(String, String)], params: &[f64]) -> Result<()> {
    writeln!(sink, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}")?;
    for (key, value) in header {
        if key.contains(char::is_whitespace) || key == "params" {
            return Err(Error::Checkpoint(format!("invalid header key {key:?}")));
        }
        writeln!(sink, "{key} {value}")?;
    }
    writeln!(sink, "params {}", params.len())?;
    for p in params {
        writeln!(sink, "{p}")?;
    }
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(source: R) -> Result<(Vec<(String, String)>, Vec<f64>)> {
    let mut lines = source.lines();
    let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(Error::from) };
    let magic = next()?.ok_or_else(|| Error::Checkpoint("empty checkpoint".into()))?;
    if magic.trim() != format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}") {
        return Err(Error::Checkpoint(format!("unrecognised checkpoint header {magic:?}")));
    }
    let mut header = Vec::new();
    let count = loop {
        let line = next()?.ok_or_else(|| Error::Checkpoint("missing params line".into()))?;
        let (key, value) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        if key == "params" {
            break value
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Checkpoint(format!("bad parameter count {value:?}")))?;
        }
        header.push((key.to_string(), value.to_string()));
    };
    let mut params = Vec::with_capacity(count);
    for k in 0..count {
        let line = next()?.ok_or_else(|| Error::Checkpoint(format!("truncated after {k} parameters")))?;
        params.push(
            line.trim()
                .parse::<f64>()
                .map_err(|_| Error::Checkpoint(format!("bad parameter {k}: {line:?}")))?,
        );
    }
    if let Some(extra) = next()? {
        if !extra.trim().is_empty() {
            return Err(Error::Checkpoint("trailing data after parameters".into()));
        }
    }
    Ok((header, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_exact(params in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..64)) {
            let header = vec![("kind".to_string(), "LSTM".to_string()), ("seed".to_string(), "3".to_string())];
            let mut buf = Vec::new();
            write_checkpoint(&mut buf, &header, &params).unwrap();
            let (h, p) = read_checkpoint(buf.as_slice()).unwrap();
            prop_assert_eq!(h, header);
            prop_assert_eq!(p.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), params.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn truncated_file_rejected() {
        let text = "aqcast-checkpoint 1\nparams 2\n1.5\n";
        assert!(matches!(read_checkpoint(text.as_bytes()), Err(Error::Checkpoint(_))));
        assert!(read_checkpoint("nonsense\n".as_bytes()).is_err());
    }
}
