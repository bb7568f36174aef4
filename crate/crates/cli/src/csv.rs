//! Fixed-format CSV: header row, `t` first, 17 significant digits.

use std::io::{self, Write};

/// `{:.16e}`: one leading digit plus sixteen decimals.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_table<W: Write>(mut w: W, times: &[f64], columns: &[(String, Vec<f64>)]) -> io::Result<()> {
    let mut header = String::from("t");
    for (name, values) in columns {
        debug_assert_eq!(values.len(), times.len());
        header.push(',');
        header.push_str(name);
    }
    header.push('\n');
    w.write_all(header.as_bytes())?;
    let mut line = String::new();
    for (k, &t) in times.iter().enumerate() {
        line.clear();
        line.push_str(&format_value(t));
        for (_, values) in columns {
            line.push(',');
            line.push_str(&format_value(values[k]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}
