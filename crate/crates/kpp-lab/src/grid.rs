//! Uniform-grid representation of one-dimensional profiles with values in
//! [0, 1], linear interpolation, quantile inversion and window recentering.
//!
//! A `GridFunction` is immutable after construction: every operation returns a
//! new value, so instances can be shared freely across threads.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Function on a uniform window `origin + i*dx`, extended by constant limits
/// outside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    origin: f64,
    dx: f64,
    values: Vec<f64>,
    left_limit: f64,
    right_limit: f64,
    monotone: bool,
}

/// Initial profiles the recursion is run from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// 1 for x > 0, 0 for x <= 0.
    Heaviside,
    /// exp(-exp(-beta x)), the double-exponential seed.
    GumbelSeed { beta: f64 },
    /// Explicit samples; pasted onto the grid by `make_grid`.
    Table(Vec<f64>),
}

impl InitialData {
    pub fn gumbel(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::invalid(format!(
                "gumbel seed needs beta > 0, got {beta}"
            )));
        }
        Ok(InitialData::GumbelSeed { beta })
    }

    /// Pointwise value of G_0. Tables carry no coordinates, so only constant
    /// tables can be evaluated off-grid.
    pub fn g0(&self, x: f64) -> Result<f64> {
        match self {
            InitialData::Heaviside => Ok(if x > 0.0 { 1.0 } else { 0.0 }),
            InitialData::GumbelSeed { beta } => Ok((-(-beta * x).exp()).exp()),
            InitialData::Table(v) => {
                let first = *v.first().ok_or_else(|| Error::invalid("empty table"))?;
                if v.iter().all(|&y| y == first) {
                    Ok(first)
                } else {
                    Err(Error::invalid(
                        "non-constant table initial data has no off-grid value",
                    ))
                }
            }
        }
    }

    /// U_0 = 1 - G_0.
    pub fn u0(&self, x: f64) -> Result<f64> {
        match self {
            InitialData::Heaviside => Ok(if x > 0.0 { 0.0 } else { 1.0 }),
            // evaluated as -expm1 to keep precision when G_0 is close to 1
            InitialData::GumbelSeed { beta } => Ok(-(-(-beta * x).exp()).exp_m1()),
            _ => Ok(1.0 - self.g0(x)?),
        }
    }

    fn is_monotone(&self) -> bool {
        match self {
            InitialData::Heaviside | InitialData::GumbelSeed { .. } => true,
            InitialData::Table(v) => v.windows(2).all(|w| w[0] <= w[1]),
        }
    }
}

/// Header serialized as a JSON comment line in the CSV format.
#[derive(Serialize, Deserialize)]
struct GridHeader {
    origin: f64,
    dx: f64,
    n: usize,
    left_limit: f64,
    right_limit: f64,
    monotone: bool,
}

pub fn make_grid(origin: f64, dx: f64, n: usize, init: &InitialData) -> Result<GridFunction> {
    if !(dx > 0.0) {
        return Err(Error::invalid(format!("dx must be positive, got {dx}")));
    }
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 grid nodes, got {n}")));
    }
    let values: Vec<f64> = match init {
        InitialData::Table(v) => {
            if v.len() != n {
                return Err(Error::invalid(format!(
                    "table length {} does not match n = {n}",
                    v.len()
                )));
            }
            if v.iter().any(|&y| !(0.0..=1.0).contains(&y)) {
                return Err(Error::invalid("table values must lie in [0, 1]"));
            }
            v.clone()
        }
        _ => (0..n)
            .map(|i| init.g0(origin + i as f64 * dx))
            .collect::<Result<_>>()?,
    };
    let (left_limit, right_limit) = match init {
        InitialData::Table(v) => (v[0], v[n - 1]),
        _ => (0.0, 1.0),
    };
    Ok(GridFunction {
        origin,
        dx,
        values,
        left_limit,
        right_limit,
        monotone: init.is_monotone(),
    })
}

impl GridFunction {
    /// Build from raw parts, validating the type invariants.
    pub fn from_values(
        origin: f64,
        dx: f64,
        values: Vec<f64>,
        left_limit: f64,
        right_limit: f64,
        monotone: bool,
    ) -> Result<Self> {
        if !(dx > 0.0) || values.len() < 2 {
            return Err(Error::invalid("grid needs dx > 0 and at least 2 nodes"));
        }
        let in_range = |v: f64| (0.0..=1.0).contains(&v);
        if !values.iter().all(|&v| in_range(v)) || !in_range(left_limit) || !in_range(right_limit)
        {
            return Err(Error::invalid("grid values must lie in [0, 1]"));
        }
        if monotone {
            let sorted = values.windows(2).all(|w| w[0] <= w[1]);
            if !sorted || left_limit > values[0] || values[values.len() - 1] > right_limit {
                return Err(Error::invalid("monotone tag set on non-monotone data"));
            }
        }
        Ok(GridFunction {
            origin,
            dx,
            values,
            left_limit,
            right_limit,
            monotone,
        })
    }

    /// Like `from_values` with the monotone tag, but first projects
    /// eps-level rounding jitter back onto the monotone cone. Meant for
    /// operator outputs whose exact counterparts are provably monotone.
    pub fn from_values_monotone_projected(
        origin: f64,
        dx: f64,
        mut values: Vec<f64>,
        left_limit: f64,
        right_limit: f64,
    ) -> Result<Self> {
        let mut prev = left_limit;
        for v in values.iter_mut() {
            *v = v.clamp(prev, right_limit);
            prev = *v;
        }
        GridFunction::from_values(origin, dx, values, left_limit, right_limit, true)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn left_limit(&self) -> f64 {
        self.left_limit
    }
    pub fn right_limit(&self) -> f64 {
        self.right_limit
    }
    pub fn monotone(&self) -> bool {
        self.monotone
    }
    /// Node coordinate x_i.
    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }
    pub fn right_edge(&self) -> f64 {
        self.x(self.values.len() - 1)
    }

    pub fn same_geometry(&self, other: &GridFunction) -> bool {
        self.origin == other.origin && self.dx == other.dx && self.len() == other.len()
    }

    /// Linear interpolation inside the window, constant limits outside.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.origin) / self.dx;
        if t <= 0.0 {
            return if t == 0.0 { self.values[0] } else { self.left_limit };
        }
        let last = (self.values.len() - 1) as f64;
        if t >= last {
            return if t == last {
                self.values[self.values.len() - 1]
            } else {
                self.right_limit
            };
        }
        let i = t.floor() as usize;
        let frac = t - i as f64;
        if frac == 0.0 {
            return self.values[i];
        }
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Inverse of `eval` at level `y` for monotone profiles. Ties resolve to
    /// the leftmost bracketing cell.
    pub fn quantile(&self, y: f64) -> Result<f64> {
        if !self.monotone {
            return Err(Error::invalid("quantile requires the monotone tag"));
        }
        let v = &self.values;
        let n = v.len();
        if !(y >= v[0] && y <= v[n - 1]) || !(y > self.left_limit && y < self.right_limit) {
            return Err(Error::NotBracketed {
                level: y,
                min: v[0],
                max: v[n - 1],
            });
        }
        // leftmost index with value >= y
        let i = v.partition_point(|&val| val < y);
        if v[i] == y {
            // exact hit; step back over an equal run to its leftmost node
            let mut j = i;
            while j > 0 && v[j - 1] == y {
                j -= 1;
            }
            return Ok(self.x(j));
        }
        // here i >= 1 and v[i-1] < y < v[i]
        let frac = (y - v[i - 1]) / (v[i] - v[i - 1]);
        Ok(self.x(i - 1) + frac * self.dx)
    }

    /// Shift the window by a whole number of cells, keeping its length.
    /// Vacated cells are filled with the corresponding boundary limit.
    pub fn recenter(&self, shift_cells: i64) -> Result<GridFunction> {
        let n = self.values.len();
        if shift_cells.unsigned_abs() as usize >= n {
            return Err(Error::invalid(format!(
                "recenter shift {shift_cells} exceeds window of {n} cells"
            )));
        }
        let mut values = vec![0.0; n];
        for (i, slot) in values.iter_mut().enumerate() {
            let src = i as i64 + shift_cells;
            *slot = if src < 0 {
                self.left_limit
            } else if src >= n as i64 {
                self.right_limit
            } else {
                self.values[src as usize]
            };
        }
        Ok(GridFunction {
            origin: self.origin + shift_cells as f64 * self.dx,
            dx: self.dx,
            values,
            left_limit: self.left_limit,
            right_limit: self.right_limit,
            monotone: self.monotone,
        })
    }

    /// CSV with a JSON header comment line and (x, value) columns.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header = GridHeader {
            origin: self.origin,
            dx: self.dx,
            n: self.values.len(),
            left_limit: self.left_limit,
            right_limit: self.right_limit,
            monotone: self.monotone,
        };
        writeln!(w, "# {}", serde_json::to_string(&header)?)?;
        writeln!(w, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.x(i), v)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<GridFunction> {
        let mut lines = r.lines();
        let head = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let json = head
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse("missing JSON header line".into()))?;
        let header: GridHeader = serde_json::from_str(json)?;
        let mut values = Vec::with_capacity(header.n);
        for line in lines {
            let line = line?;
            if line.starts_with('#') || line.starts_with('x') || line.trim().is_empty() {
                continue;
            }
            let val = line
                .split(',')
                .nth(1)
                .ok_or_else(|| Error::Parse(format!("bad row: {line}")))?;
            values.push(
                val.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad value {val:?}: {e}")))?,
            );
        }
        if values.len() != header.n {
            return Err(Error::Parse(format!(
                "header says {} rows, found {}",
                header.n,
                values.len()
            )));
        }
        GridFunction::from_values(
            header.origin,
            header.dx,
            values,
            header.left_limit,
            header.right_limit,
            header.monotone,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heaviside_sampling_uses_open_convention() {
        let g = make_grid(-1.0, 1.0, 3, &InitialData::Heaviside).unwrap();
        assert_eq!(g.values(), &[0.0, 0.0, 1.0]);
        assert!(g.monotone());
        assert_eq!(g.left_limit(), 0.0);
        assert_eq!(g.right_limit(), 1.0);
    }

    #[test]
    fn gumbel_seed_values() {
        let init = InitialData::gumbel(1.0).unwrap();
        let g = make_grid(-1.0, 1.0, 3, &init).unwrap();
        // exp(-e^0) = 1/e at the middle node
        assert!((g.values()[1] - 0.36787944117144233).abs() < 1e-15);
        assert_eq!(g.right_limit(), 1.0);
        // far right the seed tends to its limit
        assert!((init.g0(60.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn make_grid_rejects_bad_arguments() {
        assert!(make_grid(0.0, 0.0, 4, &InitialData::Heaviside).is_err());
        assert!(make_grid(0.0, -1.0, 4, &InitialData::Heaviside).is_err());
        assert!(make_grid(0.0, 1.0, 1, &InitialData::Heaviside).is_err());
        assert!(InitialData::gumbel(0.0).is_err());
        assert!(make_grid(0.0, 1.0, 3, &InitialData::Table(vec![0.0, 1.5, 1.0])).is_err());
    }

    #[test]
    fn eval_interpolates_and_extends() {
        let g = GridFunction::from_values(0.0, 1.0, vec![0.0, 1.0], 0.0, 1.0, true).unwrap();
        assert_eq!(g.eval(0.5), 0.5);
        assert_eq!(g.eval(-3.0), 0.0);
        assert_eq!(g.eval(7.0), 1.0);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(1.0), 1.0);
    }

    #[test]
    fn quantile_hits_nodes_and_interpolates() {
        let g =
            GridFunction::from_values(-1.0, 1.0, vec![0.0, 0.5, 1.0], 0.0, 1.0, true).unwrap();
        assert_eq!(g.quantile(0.5).unwrap(), 0.0);
        assert_eq!(g.quantile(0.25).unwrap(), -0.5);
        assert!(matches!(
            g.quantile(2.0),
            Err(Error::NotBracketed { .. })
        ));
    }

    #[test]
    fn quantile_breaks_ties_leftmost() {
        let g = GridFunction::from_values(
            0.0,
            1.0,
            vec![0.0, 0.5, 0.5, 0.5, 1.0],
            0.0,
            1.0,
            true,
        )
        .unwrap();
        assert_eq!(g.quantile(0.5).unwrap(), 1.0);
    }

    #[test]
    fn recenter_shifts_and_fills() {
        let g =
            GridFunction::from_values(0.0, 1.0, vec![0.1, 0.2, 0.3, 0.4], 0.0, 1.0, true).unwrap();
        assert_eq!(g.recenter(0).unwrap(), g);
        let r = g.recenter(1).unwrap();
        assert_eq!(r.values(), &[0.2, 0.3, 0.4, 1.0]);
        assert_eq!(r.origin(), 1.0);
        let back = r.recenter(-1).unwrap();
        assert_eq!(back.origin(), 0.0);
        // cells that never left the window are restored exactly
        assert_eq!(&back.values()[1..], &g.values()[1..]);
        assert!(g.recenter(4).is_err());
        assert!(g.recenter(-4).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let g = make_grid(-2.0, 0.5, 9, &InitialData::gumbel(1.3).unwrap()).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(&buf[..]).unwrap();
        assert_eq!(g, back);
    }
}
