use crate::error::{Error, Result};

use super::Side;

/// Piecewise natural cubic spline of `ρ²V` against `ln ρ`.
///
/// A repeated radius in the samples marks a jump: the spline is split there
/// and each side keeps its own one-sided value. Below the first sample `ρ²V`
/// is held constant. Above the last one it is held constant too, unless a
/// tail value `β∞` is declared, in which case `ρ²V` relaxes to it like `1/ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    pieces: Vec<Piece>,
    tail: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    rho: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    d2: Vec<f64>,
}

impl Piece {
    fn new(rho: Vec<f64>, y: Vec<f64>) -> Self {
        let x: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
        let d2 = natural_second_derivatives(&x, &y);
        Self { rho, x, y, d2 }
    }

    fn eval(&self, rho: f64) -> f64 {
        let n = self.rho.len();
        if rho <= self.rho[0] {
            return self.y[0];
        }
        if rho >= self.rho[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.rho.binary_search_by(|r| r.total_cmp(&rho)) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let t = rho.ln();
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = 1.0 - a;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.d2[i] + (b * b * b - b) * self.d2[i + 1]) * h * h / 6.0
    }
}

fn natural_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d2 = vec![0.0; n];
    if n < 3 {
        return d2;
    }
    // tridiagonal sweep
    let mut c = vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        let p = sig * d2[i - 1] + 2.0;
        d2[i] = (sig - 1.0) / p;
        let slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        c[i] = (6.0 * slope / (x[i + 1] - x[i - 1]) - sig * c[i - 1]) / p;
    }
    d2[n - 1] = 0.0;
    for i in (1..n - 1).rev() {
        d2[i] = d2[i] * d2[i + 1] + c[i];
    }
    d2
}

impl Tabulated {
    /// Builds the table from samples of `V(ρ)`.
    pub fn from_potential(rho: &[f64], v: &[f64]) -> Result<Self> {
        let y: Vec<f64> = rho.iter().zip(v).map(|(r, v)| r * r * v).collect();
        Self::from_rho2v(rho, &y)
    }

    /// Builds the table from samples of `ρ²V(ρ)`.
    pub fn from_rho2v(rho: &[f64], y: &[f64]) -> Result<Self> {
        if rho.len() != y.len() {
            return Err(Error::InvalidPotential("radius and value columns differ in length".into()));
        }
        if rho.len() < 2 {
            return Err(Error::InvalidPotential("table needs at least two samples".into()));
        }
        for (r, v) in rho.iter().zip(y) {
            if !(r.is_finite() && *r > 0.0) || !v.is_finite() {
                return Err(Error::InvalidPotential(format!("bad sample ({r}, {v})")));
            }
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        for i in 1..rho.len() {
            if rho[i] < rho[i - 1] {
                return Err(Error::InvalidPotential(format!(
                    "radii must be non-decreasing, {} after {}",
                    rho[i],
                    rho[i - 1]
                )));
            }
            if rho[i] == rho[i - 1] {
                if i - start < 2 || (i + 1 < rho.len() && rho[i + 1] == rho[i]) {
                    return Err(Error::InvalidPotential(format!(
                        "jump at {} needs at least two samples on each side",
                        rho[i]
                    )));
                }
                pieces.push(Piece::new(rho[start..i].to_vec(), y[start..i].to_vec()));
                start = i;
            }
        }
        if rho.len() - start < 2 {
            return Err(Error::InvalidPotential("last piece needs at least two samples".into()));
        }
        pieces.push(Piece::new(rho[start..].to_vec(), y[start..].to_vec()));
        Ok(Self { pieces, tail: None })
    }

    /// Declares the limit of `ρ²V` at infinity.
    pub fn with_tail(mut self, tail: f64) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn tail(&self) -> Option<f64> {
        self.tail
    }

    pub fn rho2v(&self, rho: f64, side: Side) -> f64 {
        if let Some(t) = self.tail {
            let end = self.last_knot();
            if rho > end {
                return t + (self.end_sample() - t) * end / rho;
            }
        }
        let last = self.pieces.len() - 1;
        for (j, p) in self.pieces.iter().enumerate() {
            let hi = *p.rho.last().unwrap();
            if j == last || rho < hi || (rho == hi && side == Side::Left) {
                return p.eval(rho);
            }
        }
        unreachable!()
    }

    pub fn first_value(&self) -> f64 {
        self.pieces[0].y[0]
    }

    /// Limit of `ρ²V` at infinity.
    pub fn last_value(&self) -> f64 {
        self.tail.unwrap_or_else(|| self.end_sample())
    }

    fn end_sample(&self) -> f64 {
        *self.pieces.last().unwrap().y.last().unwrap()
    }

    pub fn last_knot(&self) -> f64 {
        *self.pieces.last().unwrap().rho.last().unwrap()
    }

    pub fn jumps(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces[1..].iter().map(|p| p.rho[0])
    }

    /// All samples as `(ρ, ρ²V)`, jump radii appearing twice.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pieces.iter().flat_map(|p| p.rho.iter().copied().zip(p.y.iter().copied()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let rho: Vec<f64> = (0..400).map(|i| 0.01 * (1.02f64).powi(i)).collect();
        let f = |r: f64| 2.0 * (-r * r).exp();
        let y: Vec<f64> = rho.iter().map(|&r| f(r)).collect();
        let t = Tabulated::from_rho2v(&rho, &y).unwrap();
        for &r in &[0.013, 0.5, 1.1, 2.0] {
            assert!((t.rho2v(r, Side::Right) - f(r)).abs() < 1e-6, "{r}");
        }
        assert_eq!(t.rho2v(1e-5, Side::Right), y[0]);
        assert_eq!(t.rho2v(1e5, Side::Right), *y.last().unwrap());
    }

    #[test]
    fn keeps_jump_sides() {
        let rho = [0.5, 0.8, 1.0, 1.0, 1.5, 2.0];
        let y = [1.0, 1.0, 1.0, 4.0, 4.0, 4.0];
        let t = Tabulated::from_rho2v(&rho, &y).unwrap();
        assert_eq!(t.rho2v(1.0, Side::Left), 1.0);
        assert_eq!(t.rho2v(1.0, Side::Right), 4.0);
        assert_eq!(t.jumps().collect::<Vec<_>>(), vec![1.0]);
        assert_eq!(t.samples().count(), 6);
    }

    #[test]
    fn declared_tail_decays_like_inverse_radius() {
        let t = Tabulated::from_rho2v(&[1.0, 2.0, 4.0], &[0.0, 0.5, 1.0]).unwrap().with_tail(3.0);
        assert_eq!(t.last_value(), 3.0);
        assert_eq!(t.rho2v(4.0, Side::Right), 1.0);
        assert!((t.rho2v(8.0, Side::Right) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Tabulated::from_rho2v(&[1.0], &[1.0]).is_err());
        assert!(Tabulated::from_rho2v(&[1.0, 0.5], &[1.0, 1.0]).is_err());
        assert!(Tabulated::from_rho2v(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(Tabulated::from_rho2v(&[-1.0, 2.0], &[1.0, 1.0]).is_err());
    }
}
