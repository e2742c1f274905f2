//! Plain-text constellation table.
//!
//! ```text
//! re,im,prob,label
//! -1.0801234497346435e0,-1.0801234497346435e0,1.5625000000000000e-2,000000
//! ```
//!
//! Rows are sorted by label and floats carry 17 significant digits, which
//! makes a write/read cycle exact. Lines starting with `#` are ignored.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::Constellation;
use crate::error::{Error, Result};

pub const HEADER: &str = "re,im,prob,label";

pub fn write_table<W: Write>(c: &Constellation, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    for l in 0..c.size() {
        let x = c.points()[l];
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{}",
            x.re,
            x.im,
            c.probs()[l],
            c.label_string(l)
        )?;
    }
    Ok(())
}

pub fn read_table<R: BufRead>(input: R) -> Result<Constellation> {
    let mut entries = Vec::new();
    let mut bits: Option<usize> = None;
    let mut saw_header = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["re", "im", "prob", "label"] {
                return Err(Error::Table {
                    line: line_no,
                    msg: format!("expected header '{HEADER}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(Error::Table {
                line: line_no,
                msg: format!("expected 4 columns, found {}", cols.len()),
            });
        }
        let num = |i: usize, name: &str| -> Result<f64> {
            cols[i].parse::<f64>().map_err(|_| Error::Table {
                line: line_no,
                msg: format!("cannot parse {name} '{}'", cols[i]),
            })
        };
        let re = num(0, "re")?;
        let im = num(1, "im")?;
        let prob = num(2, "prob")?;
        let label_str = cols[3];
        if label_str.is_empty() || !label_str.chars().all(|ch| ch == '0' || ch == '1') {
            return Err(Error::Table {
                line: line_no,
                msg: format!("label '{label_str}' is not a bit string"),
            });
        }
        match bits {
            None => bits = Some(label_str.len()),
            Some(b) if b != label_str.len() => {
                return Err(Error::Table {
                    line: line_no,
                    msg: format!("label length {} differs from {b}", label_str.len()),
                })
            }
            _ => {}
        }
        let label = u32::from_str_radix(label_str, 2).map_err(|_| Error::Table {
            line: line_no,
            msg: format!("label '{label_str}' too long"),
        })?;
        entries.push((Complex64::new(re, im), prob, label));
    }
    let bits = bits.ok_or(Error::Table {
        line: 0,
        msg: "table has no rows".into(),
    })?;
    Constellation::from_labeled(bits as u32, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{realize, RawShapingParams, ShapingMode};
    use proptest::prelude::*;

    #[test]
    fn qam_table_shape() {
        let c = Constellation::qam(4).unwrap();
        let mut buf = Vec::new();
        write_table(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines.len(), 17);
        assert!(lines[1].ends_with(",0000"));
        assert!(lines[16].ends_with(",1111"));
    }

    #[test]
    fn bad_rows_report_line() {
        let text = "re,im,prob,label\n1.0,0.0,0.5,0\n# comment\n-1.0,x,0.5,1\n";
        match read_table(text.as_bytes()) {
            Err(Error::Table { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let text = "re,im,prob,label\n1.0,0.0,0.5,0\n-1.0,0.0,0.5,12\n";
        assert!(read_table(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn write_read_is_exact(
            pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 16),
            logits in prop::collection::vec(-4.0f64..4.0, 16),
        ) {
            let base = Constellation::qam(4).unwrap();
            let params = RawShapingParams {
                raw_points: pts.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
                raw_logits: logits,
            };
            prop_assume!(params.raw_points.iter().any(|x| x.norm() > 1e-3));
            let c = realize(&params, ShapingMode::Joint, &base);
            let mut buf = Vec::new();
            write_table(&c, &mut buf).unwrap();
            let back = read_table(&buf[..]).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
