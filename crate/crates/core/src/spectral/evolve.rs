//! Time stepping of the truncated equation
//! `a_n' = i (Q(n) a_n + [P_{<=N}(|u|^2 u) - M_N u]_n)`, `M_N = 2 mass(u0)`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::Workspace;
use super::wick::WickPlan;
use crate::error::{Error, IoContext, Result};
use crate::torus::{FreqIndex, TorusSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Classical RK4 on `b_n = e^{-i Q(n) t} a_n`, linear phase exact.
    #[serde(rename = "rk4-if")]
    Rk4If,
}

impl Scheme {
    pub fn id(self) -> &'static str {
        match self {
            Scheme::Rk4If => "rk4-if",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4-if" | "rk4" => Ok(Scheme::Rk4If),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Keep every `save_every`-th state (the final state is always kept).
    pub save_every: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { save_every: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub scheme_id: String,
    pub dt: f64,
    /// `(mass, energy)` at each entry of `times`.
    pub conserved_log: Vec<(f64, f64)>,
    pub m_n: f64,
    pub seed: Option<u64>,
    pub prng_id: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &SpectralField {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Largest relative deviation of mass and energy from their initial values.
    pub fn drift(&self) -> (f64, f64) {
        let (m0, e0) = self.conserved_log[0];
        let rel = |x: f64, x0: f64| (x - x0).abs() / x0.abs().max(f64::MIN_POSITIVE);
        self.conserved_log
            .iter()
            .fold((0.0, 0.0), |(dm, de), &(m, e)| (dm.max(rel(m, m0)), de.max(rel(e, e0))))
    }

    pub fn with_provenance(mut self, seed: u64, prng_id: &str) -> Self {
        self.seed = Some(seed);
        self.prng_id = Some(prng_id.to_string());
        self
    }

    /// JSON-lines checkpoint: a header, then one line per saved time with
    /// modes `[n1, n2, re, im]` in lexicographic order.
    pub fn checkpoint_lines(&self) -> Result<Vec<String>> {
        let first = &self.states[0];
        let header = CheckpointHeader {
            gamma: first.torus().gamma_string(),
            scale: first.scale(),
            dt: self.dt,
            scheme_id: self.scheme_id.clone(),
            seed: self.seed,
            prng_id: self.prng_id.clone(),
            m_n: self.m_n,
        };
        let mut lines = vec![serde_json::to_string(&header)?];
        for ((t, state), &(mass, energy)) in self.times.iter().zip(&self.states).zip(&self.conserved_log) {
            let rec = CheckpointRecord {
                t: *t,
                mass,
                energy,
                modes: state.modes().map(|(n, a)| (n.n1, n.n2, a.re, a.im)).collect(),
            };
            lines.push(serde_json::to_string(&rec)?);
        }
        Ok(lines)
    }

    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        let file = File::create(path).at(path)?;
        let mut w = BufWriter::new(file);
        for line in self.checkpoint_lines()? {
            writeln!(w, "{line}").at(path)?;
        }
        w.flush().at(path)
    }

    pub fn read_checkpoint(path: &Path) -> Result<Self> {
        let file = File::open(path).at(path)?;
        let mut lines = BufReader::new(file).lines();
        let header: CheckpointHeader = match lines.next() {
            Some(line) => serde_json::from_str(&line.at(path)?)?,
            None => return Err(Error::InvalidArgument(format!("{} is empty", path.display()))),
        };
        let torus = TorusSpec::from_str(&header.gamma)?;
        let mut traj = Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            scheme_id: header.scheme_id,
            dt: header.dt,
            conserved_log: Vec::new(),
            m_n: header.m_n,
            seed: header.seed,
            prng_id: header.prng_id,
        };
        for line in lines {
            let line = line.at(path)?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: CheckpointRecord = serde_json::from_str(&line)?;
            let field = SpectralField::from_modes(
                header.scale,
                torus,
                rec.modes
                    .into_iter()
                    .map(|(a, b, re, im)| (FreqIndex::new(a, b), Complex64::new(re, im))),
            )?;
            traj.times.push(rec.t);
            traj.states.push(field);
            traj.conserved_log.push((rec.mass, rec.energy));
        }
        if traj.states.is_empty() {
            return Err(Error::InvalidArgument(format!("{} has no states", path.display())));
        }
        Ok(traj)
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    gamma: String,
    #[serde(rename = "N")]
    scale: u64,
    dt: f64,
    scheme_id: String,
    seed: Option<u64>,
    prng_id: Option<String>,
    #[serde(rename = "M_N")]
    m_n: f64,
}

#[derive(Serialize, Deserialize)]
struct CheckpointRecord {
    t: f64,
    mass: f64,
    energy: f64,
    modes: Vec<(i64, i64, f64, f64)>,
}

/// `sum Q |a|^2 + (1/2) ||u||_{L^4}^4 - M_N sum |a|^2`, the quartic term
/// evaluated exactly on a padded grid.
pub fn energy(u: &SpectralField, m_n: f64) -> f64 {
    energy_with(u, m_n, &WickPlan::new(u.scale()), &mut Workspace::default())
}

pub(crate) fn energy_with(u: &SpectralField, m_n: f64, plan: &WickPlan, ws: &mut Workspace) -> f64 {
    let torus = u.torus();
    let kinetic: f64 = u.modes().map(|(n, a)| torus.qform(n) * a.norm_sqr()).sum();
    let vals = plan.grid().synthesize(u, ws);
    let quartic = vals.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() / vals.len() as f64;
    kinetic + 0.5 * quartic - m_n * u.mass()
}

/// Lawson RK4. The exact factor carries `Q - shift` and the stages carry
/// `P(|u|^2 u) - (M_N - shift) u`; any constant `shift` gives the same ODE.
struct Stepper {
    plan: WickPlan,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    m_n: f64,
    shift: f64,
    ws: Workspace,
}

impl Stepper {
    fn new(u0: &SpectralField, dt: f64, m_n: f64, shift: f64) -> Self {
        let s = u0.scale() as i64;
        let side = u0.side();
        let torus = *u0.torus();
        let mut half = Vec::with_capacity(side * side);
        let mut full = Vec::with_capacity(side * side);
        for i in 0..side * side {
            let n = FreqIndex::new((i / side) as i64 - s, (i % side) as i64 - s);
            let q = torus.qform(n) - shift;
            half.push(Complex64::cis(q * dt / 2.0));
            full.push(Complex64::cis(q * dt));
        }
        Self {
            plan: WickPlan::new(u0.scale()),
            half,
            full,
            m_n,
            shift,
            ws: Workspace::default(),
        }
    }

    fn force(&mut self, u: &SpectralField) -> SpectralField {
        self.plan
            .cubic_minus(u, self.m_n - self.shift, &mut self.ws)
            .scaled(Complex64::new(0.0, 1.0))
    }

    fn step(&mut self, a: &SpectralField, h: f64) -> SpectralField {
        let rot = |f: &SpectralField, ph: &[Complex64], inverse: bool| {
            let mut out = f.clone();
            for (x, p) in out.raw_mut().iter_mut().zip(ph) {
                *x *= if inverse { p.conj() } else { *p };
            }
            out
        };
        let k1 = self.force(a);
        let mut y = a.clone();
        y.axpy(Complex64::new(h / 2.0, 0.0), &k1);
        let k2 = rot(&self.force(&rot(&y, &self.half, false)), &self.half, true);
        let mut y = a.clone();
        y.axpy(Complex64::new(h / 2.0, 0.0), &k2);
        let k3 = rot(&self.force(&rot(&y, &self.half, false)), &self.half, true);
        let mut y = a.clone();
        y.axpy(Complex64::new(h, 0.0), &k3);
        let k4 = rot(&self.force(&rot(&y, &self.full, false)), &self.full, true);
        let mut b = a.clone();
        let c = Complex64::new(h / 6.0, 0.0);
        b.axpy(c, &k1);
        b.axpy(c * 2.0, &k2);
        b.axpy(c * 2.0, &k3);
        b.axpy(c, &k4);
        rot(&b, &self.full, false)
    }
}

pub fn evolve(u0: &SpectralField, dt: f64, t_end: f64, scheme: Scheme) -> Result<Trajectory> {
    evolve_with(u0, dt, t_end, scheme, &EvolveOptions::default())
}

/// Integrate on `t_k = k dt`, `k = 0..=round(T/dt)`, with `M_N` frozen at
/// `2 mass(u0)`.
pub fn evolve_with(
    u0: &SpectralField,
    dt: f64,
    t_end: f64,
    scheme: Scheme,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= dt) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and T >= dt, got dt = {dt}, T = {t_end}"
        )));
    }
    let save_every = opts.save_every.max(1);
    let steps = (t_end / dt).round() as usize;
    let m_n = 2.0 * u0.mass();
    let Scheme::Rk4If = scheme;
    // |u|^2 averages to mass(u), so this shift leaves the stages a
    // multiplier of mean zero
    let mut stepper = Stepper::new(u0, dt, m_n, u0.mass());
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0.clone()],
        scheme_id: scheme.id().to_string(),
        dt,
        conserved_log: vec![(u0.mass(), energy_with(u0, m_n, &stepper.plan, &mut stepper.ws))],
        m_n,
        seed: None,
        prng_id: None,
    };
    let mut a = u0.clone();
    for k in 1..=steps {
        let next = stepper.step(&a, dt);
        if !next.is_finite() {
            return Err(Error::NonFinite {
                t_failed: k as f64 * dt,
                last_finite_time: (k - 1) as f64 * dt,
            });
        }
        a = next;
        if k % save_every == 0 || k == steps {
            let e = energy_with(&a, m_n, &stepper.plan, &mut stepper.ws);
            traj.times.push(k as f64 * dt);
            traj.conserved_log.push((a.mass(), e));
            traj.states.push(a.clone());
        }
    }
    Ok(traj)
}
