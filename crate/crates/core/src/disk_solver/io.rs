//! Field dumps: a short text header terminated by `END`, followed by
//! little-endian `f64` pairs in row-major node order (`NaN` outside).

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::{Error, Result, Vec2};

use super::{build_grid, DiskField};

const MAGIC: &str = "TJFIELD 1";

#[derive(Debug, Clone)]
pub struct FieldDump {
    pub field: DiskField,
    pub potential_tag: String,
    pub angles: [f64; 3],
}

pub fn write_field<W: Write>(mut out: W, f: &DiskField, potential_tag: &str, angles: [f64; 3]) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "n {}", f.grid().n())?;
    writeln!(out, "epsilon {:e}", f.epsilon())?;
    writeln!(out, "potential {potential_tag}")?;
    writeln!(out, "angles {:e} {:e} {:e}", angles[0], angles[1], angles[2])?;
    writeln!(out, "END")?;
    let mut bytes = Vec::with_capacity(16 * f.values().len());
    for u in f.values() {
        bytes.extend_from_slice(&u.x.to_le_bytes());
        bytes.extend_from_slice(&u.y.to_le_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

fn field_value<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::Format(format!("expected `{key} …`, found `{line}`")))
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Format(format!("cannot parse `{s}`")))
}

pub fn read_field<R: BufRead>(mut input: R) -> Result<FieldDump> {
    let mut lines = Vec::new();
    loop {
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::Format("header is not terminated by END".into()));
        }
        let line = line.trim_end_matches('\n').to_string();
        if line == "END" {
            break;
        }
        lines.push(line);
        if lines.len() > 16 {
            return Err(Error::Format("header too long".into()));
        }
    }
    if lines.len() != 5 || lines[0] != MAGIC {
        return Err(Error::Format(format!("unrecognized header {lines:?}")));
    }
    let n: usize = parse(field_value(&lines[1], "n")?)?;
    let epsilon: f64 = parse(field_value(&lines[2], "epsilon")?)?;
    let potential_tag = field_value(&lines[3], "potential")?.to_string();
    let angle_parts: Vec<f64> =
        field_value(&lines[4], "angles")?.split_whitespace().map(parse).collect::<Result<_>>()?;
    let angles: [f64; 3] =
        angle_parts.try_into().map_err(|_| Error::Format("expected three angles".into()))?;

    let grid = Arc::new(build_grid(n)?);
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * n * n {
        return Err(Error::Format(format!("{} payload bytes, expected {}", bytes.len(), 16 * n * n)));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let x = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let y = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Vec2::new(x, y)
        })
        .collect();
    Ok(FieldDump { field: DiskField::from_values(grid, epsilon, values)?, potential_tag, angles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::ConstantTrace;

    #[test]
    fn round_trip_preserves_bits() {
        let grid = Arc::new(build_grid(64).unwrap());
        let f = DiskField::from_fn(grid, 0.125, &ConstantTrace(Vec2::new(1.0, -2.0)), |z| Vec2::new(z.x.exp(), z.y / 3.0));
        let mut buf = Vec::new();
        write_field(&mut buf, &f, "product", [2.0, 2.1, 0.3]).unwrap();
        let back = read_field(&buf[..]).unwrap();
        assert_eq!(back.potential_tag, "product");
        assert_eq!(back.angles, [2.0, 2.1, 0.3]);
        assert_eq!(back.field.epsilon(), 0.125);
        for (a, b) in f.values().iter().zip(back.field.values()) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let grid = Arc::new(build_grid(64).unwrap());
        let f = DiskField::from_fn(grid, 0.1, &ConstantTrace(Vec2::zeros()), |_| Vec2::zeros());
        let mut buf = Vec::new();
        write_field(&mut buf, &f, "product", [2.0, 2.0, 2.0]).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_field(&buf[..]), Err(Error::Format(_))));
        assert!(matches!(read_field(&b"garbage\n"[..]), Err(Error::Format(_))));
    }
}
