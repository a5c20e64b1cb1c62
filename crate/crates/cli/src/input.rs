//! Text format for systems `x^{1+γ}Y′ = F0(x) + A(x)Y + F(x, Y)`.
//!
//! ```text
//! [system]
//! gamma = 1
//! n = 1
//! order = 24          # optional, default 40
//!
//! [A]                 # row col power re im
//! 0 0 0 1.0 0.0
//!
//! [F0]                # row power re im
//! 0 1 1.0 0.0
//!
//! [F]                 # component exponents power re im
//! 0 2 1 1.0 0.0       # exponents comma separated: 1,1 for y0*y1
//! ```
//!
//! `#` starts a comment. Entries with the same key accumulate.

use transseries::formal_series::{MatSeries, MultiIndex, Nonlinearity, Series};
use transseries::scalar::cx;
use transseries::{NonlinearSystem, C64};

use crate::CliError;

pub const DEFAULT_ORDER: usize = 40;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    System,
    A,
    F0,
    F,
}

fn err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(line: usize, name: &str, raw: &str) -> Result<T, CliError> {
    raw.parse().map_err(|_| err(line, format!("{name}: cannot parse {raw:?}")))
}

fn complex(line: usize, re: &str, im: &str) -> Result<C64, CliError> {
    let v: C64 = cx(field(line, "re", re)?, field(line, "im", im)?);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(err(line, "coefficient is not finite"))
    }
}

struct Raw {
    gamma: Option<u32>,
    n: Option<usize>,
    order: usize,
    a: Vec<(usize, usize, usize, C64, usize)>,
    f0: Vec<(usize, usize, C64, usize)>,
    f: Vec<(usize, Vec<u32>, usize, C64, usize)>,
}

/// Parse the text format into a system.
pub fn parse_system(text: &str) -> Result<NonlinearSystem, CliError> {
    let mut raw = Raw {
        gamma: None,
        n: None,
        order: DEFAULT_ORDER,
        a: Vec::new(),
        f0: Vec::new(),
        f: Vec::new(),
    };
    let mut section = Section::None;
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "system" => Section::System,
                "A" => Section::A,
                "F0" => Section::F0,
                "F" => Section::F,
                other => return Err(err(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let cols: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => return Err(err(line, "entry before any section header")),
            Section::System => {
                let (key, value) = content
                    .split_once('=')
                    .ok_or_else(|| err(line, "expected key = value"))?;
                let value = value.trim();
                match key.trim() {
                    "gamma" => raw.gamma = Some(field(line, "gamma", value)?),
                    "n" => raw.n = Some(field(line, "n", value)?),
                    "order" => raw.order = field(line, "order", value)?,
                    other => return Err(err(line, format!("unknown key {other:?}"))),
                }
            }
            Section::A => {
                if cols.len() != 5 {
                    return Err(err(line, "[A] entries are: row col power re im"));
                }
                raw.a.push((
                    field(line, "row", cols[0])?,
                    field(line, "col", cols[1])?,
                    field(line, "power", cols[2])?,
                    complex(line, cols[3], cols[4])?,
                    line,
                ));
            }
            Section::F0 => {
                if cols.len() != 4 {
                    return Err(err(line, "[F0] entries are: row power re im"));
                }
                raw.f0.push((
                    field(line, "row", cols[0])?,
                    field(line, "power", cols[1])?,
                    complex(line, cols[2], cols[3])?,
                    line,
                ));
            }
            Section::F => {
                if cols.len() != 5 {
                    return Err(err(line, "[F] entries are: component exponents power re im"));
                }
                let exps = cols[1]
                    .split(',')
                    .map(|e| field::<u32>(line, "exponent", e.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                raw.f.push((
                    field(line, "component", cols[0])?,
                    exps,
                    field(line, "power", cols[2])?,
                    complex(line, cols[3], cols[4])?,
                    line,
                ));
            }
        }
    }
    build(raw)
}

fn build(raw: Raw) -> Result<NonlinearSystem, CliError> {
    let gamma = raw.gamma.ok_or_else(|| err(0, "[system] gamma is missing"))?;
    let n = raw.n.ok_or_else(|| err(0, "[system] n is missing"))?;
    if n == 0 {
        return Err(err(0, "n must be positive"));
    }
    let order = raw.order;
    let check = |line: usize, what: &str, idx: usize, bound: usize| {
        if idx < bound {
            Ok(())
        } else {
            Err(err(line, format!("{what} {idx} out of range (< {bound})")))
        }
    };
    let mut a = vec![vec![vec![cx(0.0, 0.0); order + 1]; n]; n];
    for &(i, j, m, v, line) in &raw.a {
        check(line, "row", i, n)?;
        check(line, "col", j, n)?;
        check(line, "power", m, order + 1)?;
        a[i][j][m] += v;
    }
    let mut f0 = vec![vec![cx(0.0, 0.0); order + 1]; n];
    for &(i, m, v, line) in &raw.f0 {
        check(line, "row", i, n)?;
        check(line, "power", m, order + 1)?;
        f0[i][m] += v;
    }
    let series = |c: Vec<C64>| Series::new(c).map_err(CliError::from);
    let a = a
        .into_iter()
        .map(|row| row.into_iter().map(series).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let a = MatSeries::from_entries(&a)?;
    let f0 = f0.into_iter().map(series).collect::<Result<Vec<_>, _>>()?;
    let mut f = Nonlinearity::zero(n);
    for (i, exps, m, v, line) in raw.f {
        check(line, "component", i, n)?;
        check(line, "power", m, order + 1)?;
        if exps.len() != n {
            return Err(err(line, format!("exponent list has {} entries, expected {n}", exps.len())));
        }
        f.add_term(i, MultiIndex::new(exps), Series::monomial(v, m, order))
            .map_err(|e| err(line, e.to_string()))?;
    }
    Ok(NonlinearSystem::new(gamma, f0, a, f)?)
}
