//! Second-order leapfrog integration of `u_tt = c(x, t)²·u_xx` with
//! Dirichlet data from an exact solution, used to cross-check closed forms.

use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::field::JetField;
use crate::speeds::WaveSpeed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("cfl must lie in (0, 1] (got {0})")]
    Cfl(f64),
    #[error("grid needs b > a and at least 8 cells")]
    Grid,
    #[error("time span must be positive (t0 = {t0}, t_end = {t_end})")]
    Span { t0: f64, t_end: f64 },
    #[error("speed must be positive on the box: c({x}, {t}) = {c}")]
    NonPositiveSpeed { x: f64, t: f64, c: f64 },
    #[error("non-finite values at time level {level} (t = {t})")]
    Unstable { level: usize, t: f64 },
    #[error("convergence fit needs at least 3 entries (got {0})")]
    TooFewEntries(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    /// Number of cells; there are `n + 1` nodes.
    pub n: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Grid1D, FdError> {
        if !(b > a) || n < 8 || !a.is_finite() || !b.is_finite() {
            return Err(FdError::Grid);
        }
        Ok(Grid1D { a, b, n })
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + self.h() * i as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.x(i)).collect()
    }
}

/// Time levels `t₀, t₀ + Δt, …` of a solution on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field2D {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    /// `values[level][i]`.
    pub values: Vec<Vec<f64>>,
    pub dt: f64,
    pub speed: String,
    pub scheme: &'static str,
    pub cfl: f64,
}

impl Field2D {
    pub fn last(&self) -> &[f64] {
        self.values.last().expect("at least one level")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("at least one level")
    }
}

type Profile<'a> = &'a dyn Fn(f64) -> Result<f64, EvalError>;
type Trace<'a> = &'a dyn Fn(f64, f64) -> Result<f64, EvalError>;

/// Largest `c` on a 64×64 sample of the box; errors on `c ≤ 0`.
fn max_speed(speed: &WaveSpeed, grid: &Grid1D, t0: f64, t_end: f64) -> Result<f64, FdError> {
    const SAMPLES: usize = 64;
    let mut cmax: f64 = 0.0;
    for i in 0..SAMPLES {
        let x = grid.a + (grid.b - grid.a) * i as f64 / (SAMPLES - 1) as f64;
        for j in 0..SAMPLES {
            let t = t0 + (t_end - t0) * j as f64 / (SAMPLES - 1) as f64;
            let c = speed.value(x, t)?;
            if !(c > 0.0) {
                return Err(FdError::NonPositiveSpeed { x, t, c });
            }
            cmax = cmax.max(c);
        }
    }
    Ok(cmax)
}

/// Three-level leapfrog from `t0` to `t_end`.
///
/// `Δt = cfl·h / max c`, shrunk so that a whole number of steps lands on
/// `t_end`. The first step uses `u¹ = φ + Δtψ + (Δt²/2)c²φ_xx`.
#[allow(clippy::too_many_arguments)]
pub fn leapfrog_solve(
    speed: &WaveSpeed,
    phi: Profile<'_>,
    psi: Profile<'_>,
    boundary: Trace<'_>,
    grid: Grid1D,
    t0: f64,
    t_end: f64,
    cfl: f64,
) -> Result<Field2D, FdError> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(FdError::Cfl(cfl));
    }
    if !(t_end > t0) {
        return Err(FdError::Span { t0, t_end });
    }
    let h = grid.h();
    let cmax = max_speed(speed, &grid, t0, t_end)?;
    let steps = ((t_end - t0) * cmax / (cfl * h)).ceil().max(1.0) as usize;
    let dt = (t_end - t0) / steps as f64;
    let xs = grid.nodes();
    let n = grid.n;

    let c2 = |t: f64| -> Result<Vec<f64>, FdError> {
        xs.iter()
            .map(|&x| {
                let c = speed.value(x, t)?;
                if !(c > 0.0) {
                    return Err(FdError::NonPositiveSpeed { x, t, c });
                }
                Ok(c * c)
            })
            .collect()
    };

    let u0: Vec<f64> = xs.iter().map(|&x| phi(x)).collect::<Result<_, _>>()?;
    let v0: Vec<f64> = xs.iter().map(|&x| psi(x)).collect::<Result<_, _>>()?;
    let mut times = vec![t0];
    let mut values = vec![u0];

    let k0 = c2(t0)?;
    let t1 = t0 + dt;
    let mut u1 = vec![0.0; n + 1];
    {
        let u = &values[0];
        for i in 1..n {
            let uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            u1[i] = u[i] + dt * v0[i] + 0.5 * dt * dt * k0[i] * uxx;
        }
    }
    u1[0] = boundary(xs[0], t1)?;
    u1[n] = boundary(xs[n], t1)?;
    times.push(t1);
    values.push(u1);

    let r = (dt / h) * (dt / h);
    for level in 1..steps {
        let t = t0 + dt * level as f64;
        let t_next = if level + 1 == steps {
            t_end
        } else {
            t0 + dt * (level + 1) as f64
        };
        let k = c2(t)?;
        let (prev, cur) = (&values[level - 1], &values[level]);
        let mut next = vec![0.0; n + 1];
        for i in 1..n {
            next[i] = 2.0 * cur[i] - prev[i] + r * k[i] * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]);
        }
        next[0] = boundary(xs[0], t_next)?;
        next[n] = boundary(xs[n], t_next)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(FdError::Unstable {
                level: level + 1,
                t: t_next,
            });
        }
        times.push(t_next);
        values.push(next);
    }
    if let Some(last) = times.last_mut() {
        *last = t_end;
    }

    Ok(Field2D {
        grid,
        times,
        values,
        dt,
        speed: speed.to_string(),
        scheme: "leapfrog",
        cfl,
    })
}

/// Leapfrog with data and boundary trace taken from an exact solution.
pub fn leapfrog_manufactured(
    exact: &dyn JetField,
    speed: &WaveSpeed,
    grid: Grid1D,
    t0: f64,
    t_end: f64,
    cfl: f64,
) -> Result<Field2D, FdError> {
    let phi = |x: f64| exact.value_at(x, t0);
    let psi = |x: f64| Ok(exact.jet_at(x, t0)?.f_t());
    let boundary = |x: f64, t: f64| exact.value_at(x, t);
    leapfrog_solve(speed, &phi, &psi, &boundary, grid, t0, t_end, cfl)
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub h: f64,
    pub max_error: f64,
    /// Root-mean-square error over the nodes.
    pub l2_error: f64,
}

/// Errors at `t_end` against the exact solution for each cell count.
pub fn convergence_study(
    exact: &dyn JetField,
    speed: &WaveSpeed,
    (a, b): (f64, f64),
    (t0, t_end): (f64, f64),
    cells: &[usize],
    cfl: f64,
) -> Result<Vec<ErrorRow>, FdError> {
    cells
        .iter()
        .map(|&n| {
            let grid = Grid1D::new(a, b, n)?;
            let field = leapfrog_manufactured(exact, speed, grid, t0, t_end, cfl)?;
            let mut max_error: f64 = 0.0;
            let mut sq = 0.0;
            for (i, &u) in field.last().iter().enumerate() {
                let e = (u - exact.value_at(grid.x(i), t_end)?).abs();
                max_error = max_error.max(e);
                sq += e * e;
            }
            Ok(ErrorRow {
                h: grid.h(),
                max_error,
                l2_error: (sq / (n + 1) as f64).sqrt(),
            })
        })
        .collect()
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_order(errors: &[(f64, f64)]) -> Result<f64, FdError> {
    if errors.len() < 3 {
        return Err(FdError::TooFewEntries(errors.len()));
    }
    let pts: Vec<(f64, f64)> = errors.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::field::ExprField;

    #[test]
    fn zero_data_stays_zero() {
        let speed = WaveSpeed::quadratic_x();
        let zero = |_: f64| Ok(0.0);
        let zero2 = |_: f64, _: f64| Ok(0.0);
        let grid = Grid1D::new(1.0, 2.0, 16).unwrap();
        let f = leapfrog_solve(&speed, &zero, &zero, &zero2, grid, 0.0, 0.3, 0.5).unwrap();
        assert!(f.values.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(f.t_end(), 0.3);
    }

    #[test]
    fn classical_constant_speed_converges() {
        let exact = ExprField(Expression::parse("sin(3.141592653589793*(x - t))", &["x", "t"]).unwrap());
        let speed = WaveSpeed::profile_str("1").unwrap();
        let rows = convergence_study(&exact, &speed, (0.0, 1.0), (0.0, 0.5), &[16, 32, 64], 0.5).unwrap();
        let order = convergence_order(&rows.iter().map(|r| (r.h, r.max_error)).collect::<Vec<_>>()).unwrap();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn order_fit_examples() {
        let sq: Vec<_> = [0.1, 0.05, 0.025].iter().map(|&h| (h, h * h)).collect();
        assert!((convergence_order(&sq).unwrap() - 2.0).abs() < 1e-12);
        let lin: Vec<_> = [0.1, 0.05, 0.025].iter().map(|&h| (h, h)).collect();
        assert!((convergence_order(&lin).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(convergence_order(&sq[..2]), Err(FdError::TooFewEntries(2)));
    }

    #[test]
    fn rejects_bad_parameters() {
        let speed = WaveSpeed::quadratic_x();
        let zero = |_: f64| Ok(0.0);
        let zero2 = |_: f64, _: f64| Ok(0.0);
        let grid = Grid1D::new(1.0, 2.0, 16).unwrap();
        for cfl in [0.0, 1.5, f64::NAN] {
            let r = leapfrog_solve(&speed, &zero, &zero, &zero2, grid, 0.0, 0.3, cfl);
            assert!(matches!(r, Err(FdError::Cfl(_))));
        }
        assert_eq!(Grid1D::new(1.0, 2.0, 4), Err(FdError::Grid));
        let neg = WaveSpeed::profile_str("x - 1.5").unwrap();
        let r = leapfrog_solve(&neg, &zero, &zero, &zero2, grid, 0.0, 0.3, 0.5);
        assert!(matches!(r, Err(FdError::NonPositiveSpeed { .. })));
    }
}
