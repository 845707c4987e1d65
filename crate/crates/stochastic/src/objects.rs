//! Renormalized stochastic objects along a stationary free-field path.
//!
//! The tower is built pointwise in time: the Wick cube, the ancient-past
//! quadratic integral (second Picard iterate), the renormalized quadratic
//! acting on that iterate, the causal third iterate, the rough shift, and
//! the remainder forcing. A streaming cursor keeps O(1) fields in memory
//! so integrators can walk arbitrarily long grids; the stored series type
//! collects a whole grid for inspection, dumps, and tests.

use std::path::Path;

use tff_core::io::{write_field_file, Report};
use tff_core::lattice::hat2;
use tff_core::nonlocal::{nonlocal_product, partial_pairing};
use tff_core::renorm::Cutoff;
use tff_core::{Color, FourierField, ModeLattice, PairingKind, RenormTable};

use crate::error::{Result, StochasticError};
use crate::ou::{evolve_ou, OuState};
use crate::streams::{ReplicaStreams, StreamPurpose};

/// Relaxation step of the ancient-past spin-up.
const SPIN_UP_STEP: f64 = 0.01;
/// Spin-up length in time units; the slowest mode relaxes at rate 1, so
/// this leaves a residual of order `exp(-10)`.
const SPIN_UP_LENGTH: f64 = 10.0;

/// Checks that a sharp-cutoff table matches the field's lattice.
fn check_hard_table(lat: &ModeLattice, table: &RenormTable) -> Result<()> {
    if table.d != lat.d() {
        return Err(StochasticError::TableMismatch(format!(
            "table dimension {} vs lattice dimension {}",
            table.d,
            lat.d()
        )));
    }
    match table.cutoff {
        Cutoff::Hard(n) => {
            let ln = lat.cutoff()?;
            if n != ln {
                return Err(StochasticError::TableMismatch(format!(
                    "table cutoff {n} vs lattice cutoff {ln}"
                )));
            }
            Ok(())
        }
        Cutoff::Scale(_) => Err(StochasticError::TableMismatch(
            "scale-kernel table supplied to a sharp-cutoff object".into(),
        )),
    }
}

/// The renormalized cube `N(x,x,x) - c1 x`.
pub fn build_wick_cube(x: &FourierField, table: &RenormTable) -> Result<FourierField> {
    check_hard_table(&x.lattice(), table)?;
    let mut cube = nonlocal_product(x, x, x)?;
    cube.add_scaled(-table.c1_total, x);
    cube.hermitize();
    Ok(cube)
}

/// The renormalized quadratic branch acting on `psi`:
/// `N(psi,x,x) - c1 psi + N(x,psi,x) + N(x,x,psi) - c2 x`.
pub(crate) fn quadratic_on(
    psi: &FourierField,
    x: &FourierField,
    table: &RenormTable,
) -> Result<FourierField> {
    let mut out = nonlocal_product(psi, x, x)?;
    out.add_scaled(-table.c1_total, psi);
    out.add_scaled(1.0, &nonlocal_product(x, psi, x)?);
    out.add_scaled(1.0, &nonlocal_product(x, x, psi)?);
    out.add_scaled(-table.c2_total, x);
    out.hermitize();
    Ok(out)
}

/// The purple cube of the rough shift: `N(b,b,b) - (c1 - c2) b`.
pub(crate) fn purple_cube(b: &FourierField, table: &RenormTable) -> Result<FourierField> {
    let mut out = nonlocal_product(b, b, b)?;
    out.add_scaled(-(table.c1_total - table.c2_total), b);
    out.hermitize();
    Ok(out)
}

/// Per-step multipliers of the exact heat update, cached by step size.
struct EtdCoeffs {
    h: f64,
    decay: Vec<f64>,
    weight: Vec<f64>,
}

impl EtdCoeffs {
    fn new(hat2s: &[f64], h: f64) -> Self {
        let decay: Vec<f64> = hat2s.iter().map(|&l| (-h * l).exp()).collect();
        let weight = hat2s
            .iter()
            .zip(&decay)
            .map(|(&l, &d)| (1.0 - d) / l)
            .collect();
        EtdCoeffs { h, decay, weight }
    }

    /// `decay * prev + weight * forcing`, the exact one-step heat solve
    /// with the forcing frozen at the left endpoint.
    fn step(&self, prev: &mut FourierField, forcing: &FourierField) {
        let f = forcing.as_slice();
        for (i, z) in prev.as_mut_slice().iter_mut().enumerate() {
            *z = self.decay[i] * *z + self.weight[i] * f[i];
        }
    }
}

/// Streaming builder of the object tower; holds one time slice.
pub struct EnhancedCursor {
    state: OuState,
    table: RenormTable,
    hat2s: Vec<f64>,
    coeffs: Option<EtdCoeffs>,
    x3: FourierField,
    pic2: FourierField,
    x2pic2: FourierField,
    pic3: FourierField,
    rough_shift: FourierField,
    s: FourierField,
}

impl EnhancedCursor {
    /// Spins up the ancient-past quadratic integral behind `state` and
    /// assembles the tower at the state's current time.
    ///
    /// The spin-up runs a side path with its own stream purpose, so it
    /// never perturbs the draws of the main path. Stationarity makes the
    /// side path statistically indistinguishable from the past of the
    /// main one, and the integral is accumulated with exact per-mode heat
    /// damping, oldest contributions weakest.
    pub fn new(state: OuState, table: &RenormTable, streams: &ReplicaStreams) -> Result<Self> {
        let lat = state.lattice();
        check_hard_table(&lat, table)?;
        let hat2s: Vec<f64> = (0..lat.len()).map(|i| hat2(&lat.mode(i))).collect();

        let mut aux = OuState::from_field(
            state.field().clone(),
            state.time(),
            streams,
            StreamPurpose::SpinUp,
        );
        let spin = EtdCoeffs::new(&hat2s, SPIN_UP_STEP);
        let steps = (SPIN_UP_LENGTH / SPIN_UP_STEP).round() as usize;
        let mut pic2 = FourierField::zeros(lat);
        let mut fac = spin.weight.clone();
        for _ in 0..steps {
            evolve_ou(&mut aux, SPIN_UP_STEP)?;
            let cube = build_wick_cube(aux.field(), table)?;
            let c = cube.as_slice();
            for (i, z) in pic2.as_mut_slice().iter_mut().enumerate() {
                *z += fac[i] * c[i];
                // Damping grows with the age of the contribution.
            }
            for (f, d) in fac.iter_mut().zip(&spin.decay) {
                *f *= d;
            }
        }

        let mut cursor = EnhancedCursor {
            state,
            table: table.clone(),
            hat2s,
            coeffs: None,
            x3: FourierField::zeros(lat),
            pic2,
            x2pic2: FourierField::zeros(lat),
            pic3: FourierField::zeros(lat),
            rough_shift: FourierField::zeros(lat),
            s: FourierField::zeros(lat),
        };
        cursor.refresh()?;
        Ok(cursor)
    }

    /// Rebuilds the pointwise objects from the current `x`, `pic2`,
    /// `pic3`.
    fn refresh(&mut self) -> Result<()> {
        let x = self.state.field();
        self.x3 = build_wick_cube(x, &self.table)?;
        self.x2pic2 = quadratic_on(&self.pic2, x, &self.table)?;
        self.rough_shift = x.minus(&self.pic2).plus(&self.pic3);
        let px3 = purple_cube(&self.rough_shift, &self.table)?;
        self.s = px3.minus(&self.x3).plus(&self.x2pic2);
        Ok(())
    }

    /// Advances the path by `h`: integrals absorb the current slice with
    /// the exact heat update, the field takes one exact OU step, and the
    /// pointwise objects are rebuilt.
    pub fn step(&mut self, h: f64) -> Result<()> {
        if !(h > 0.0) {
            return Err(StochasticError::InvalidArgument(format!(
                "step must be positive, got {h}"
            )));
        }
        if self.coeffs.as_ref().map(|c| c.h) != Some(h) {
            self.coeffs = Some(EtdCoeffs::new(&self.hat2s, h));
        }
        let coeffs = self.coeffs.as_ref().expect("coefficients just built");
        coeffs.step(&mut self.pic2, &self.x3);
        coeffs.step(&mut self.pic3, &self.x2pic2);
        evolve_ou(&mut self.state, h)?;
        self.refresh()
    }

    pub fn time(&self) -> f64 {
        self.state.time()
    }

    pub fn lattice(&self) -> ModeLattice {
        self.state.lattice()
    }

    pub fn table(&self) -> &RenormTable {
        &self.table
    }

    pub fn x(&self) -> &FourierField {
        self.state.field()
    }

    pub fn x3(&self) -> &FourierField {
        &self.x3
    }

    pub fn pic2(&self) -> &FourierField {
        &self.pic2
    }

    pub fn x2pic2(&self) -> &FourierField {
        &self.x2pic2
    }

    pub fn pic3(&self) -> &FourierField {
        &self.pic3
    }

    pub fn rough_shift(&self) -> &FourierField {
        &self.rough_shift
    }

    pub fn s(&self) -> &FourierField {
        &self.s
    }
}

/// The object tower stored on a whole uniform time grid.
#[derive(Debug, Clone)]
pub struct EnhancedNoise {
    pub grid: Vec<f64>,
    pub x: Vec<FourierField>,
    pub x3: Vec<FourierField>,
    pub pic2: Vec<FourierField>,
    pub x2pic2: Vec<FourierField>,
    pub pic3: Vec<FourierField>,
    pub rough_shift: Vec<FourierField>,
    pub s: Vec<FourierField>,
    pub table: RenormTable,
}

/// Builds the stored tower over a consecutive OU evolution.
///
/// `states` must be one path sampled at uniform times: each entry the
/// exact evolution of the previous one. The builder replays the path from
/// the first state (per-mode streams make the replay bit-identical) and
/// checks agreement with every supplied snapshot.
pub fn build_enhanced_noise(
    states: &[OuState],
    table: &RenormTable,
    streams: &ReplicaStreams,
) -> Result<EnhancedNoise> {
    if states.is_empty() {
        return Err(StochasticError::InvalidGrid("no states supplied".into()));
    }
    let lat = states[0].lattice();
    if states.iter().any(|s| s.lattice() != lat) {
        return Err(StochasticError::InvalidGrid(
            "states live on different lattices".into(),
        ));
    }
    let grid: Vec<f64> = states.iter().map(|s| s.time()).collect();
    let h = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    if grid.len() > 1 {
        if !(h > 0.0) {
            return Err(StochasticError::InvalidGrid(format!(
                "grid step {h} is not positive"
            )));
        }
        for w in grid.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                return Err(StochasticError::InvalidGrid(format!(
                    "grid is not uniform: step {} vs {h}",
                    w[1] - w[0]
                )));
            }
        }
    }

    let mut cursor = EnhancedCursor::new(states[0].clone(), table, streams)?;
    let mut out = EnhancedNoise {
        grid,
        x: Vec::with_capacity(states.len()),
        x3: Vec::with_capacity(states.len()),
        pic2: Vec::with_capacity(states.len()),
        x2pic2: Vec::with_capacity(states.len()),
        pic3: Vec::with_capacity(states.len()),
        rough_shift: Vec::with_capacity(states.len()),
        s: Vec::with_capacity(states.len()),
        table: table.clone(),
    };
    for (k, state) in states.iter().enumerate() {
        if k > 0 {
            cursor.step(h)?;
        }
        if cursor.x().as_slice() != state.field().as_slice() {
            return Err(StochasticError::InvalidGrid(format!(
                "state {k} is not the evolution of its predecessor",
            )));
        }
        out.x.push(cursor.x().clone());
        out.x3.push(cursor.x3().clone());
        out.pic2.push(cursor.pic2().clone());
        out.x2pic2.push(cursor.x2pic2().clone());
        out.pic3.push(cursor.pic3().clone());
        out.rough_shift.push(cursor.rough_shift().clone());
        out.s.push(cursor.s().clone());
    }
    Ok(out)
}

impl EnhancedNoise {
    pub fn lattice(&self) -> ModeLattice {
        self.table_lattice()
    }

    fn table_lattice(&self) -> ModeLattice {
        self.x[0].lattice()
    }

    /// Writes every object series as TFF1 snapshots plus a manifest.
    pub fn dump(&self, dir: &Path, seed: u64) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let series: [(&str, &[FourierField]); 7] = [
            ("x", &self.x),
            ("x3", &self.x3),
            ("pic2", &self.pic2),
            ("x2pic2", &self.x2pic2),
            ("pic3", &self.pic3),
            ("rough_shift", &self.rough_shift),
            ("s", &self.s),
        ];
        for (name, fields) in series {
            for (k, field) in fields.iter().enumerate() {
                let path = dir.join(format!("{name}_{k:04}.tff1"));
                write_field_file(path, field, self.grid[k])?;
            }
        }
        let lat = self.table_lattice();
        let mut report = Report::new();
        report
            .push_usize("d", lat.d())
            .push_i64("cutoff", lat.cutoff()?)
            .push_usize("grid_points", self.grid.len())
            .push_f64("grid_start", self.grid[0])
            .push_f64(
                "grid_step",
                if self.grid.len() > 1 {
                    self.grid[1] - self.grid[0]
                } else {
                    0.0
                },
            )
            .push("seed", seed.to_string())
            .push_f64("c1_total", self.table.c1_total)
            .push_f64("c2_total", self.table.c2_total);
        std::fs::write(dir.join("manifest.txt"), report.render())?;
        Ok(())
    }
}

/// The random operators acting on deterministic fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomOp {
    /// `N^c(f, x, x) - c1^c f`; renormalized first-slot gluing.
    X2m(Color),
    /// `N^c(x, x, f)`; last-slot gluing, no counterterm.
    X2nm(Color),
    /// `sum_c N^c(x, f, x)`; middle-slot gluing over all colors.
    XdotX,
    /// `XdotX(L^-1 XdotX(f))` with the causal heat inverse over the
    /// available history.
    Sym,
    /// First-slot gluing against the rough shift with the reduced
    /// counterterm `c1^c - c2^c`.
    RoughX2m(Color),
    RoughX2nm(Color),
    RoughXdotX,
    RoughSym,
}

/// Applies a random operator at one grid time to the field `f`.
///
/// The operators are algebraic in `f`; `f` lives on the full lattice and
/// no support restriction is imposed here.
pub fn apply_random_operator(
    op: RandomOp,
    noise: &EnhancedNoise,
    time_index: usize,
    f: &FourierField,
) -> Result<FourierField> {
    if time_index >= noise.grid.len() {
        return Err(StochasticError::InvalidArgument(format!(
            "time index {time_index} outside grid of {} points",
            noise.grid.len()
        )));
    }
    if f.lattice() != noise.lattice() {
        return Err(StochasticError::InvalidArgument(
            "operand lives on a different lattice".into(),
        ));
    }
    let table = &noise.table;
    let (base, reduce) = match op {
        RandomOp::X2m(_) | RandomOp::X2nm(_) | RandomOp::XdotX | RandomOp::Sym => {
            (&noise.x[time_index], false)
        }
        _ => (&noise.rough_shift[time_index], true),
    };
    let ct = |c: Color| {
        let k = c.axis();
        if reduce {
            table.c1_per_color[k] - table.c2_per_color[k]
        } else {
            table.c1_per_color[k]
        }
    };
    match op {
        RandomOp::X2m(c) | RandomOp::RoughX2m(c) => {
            let mut out = partial_pairing(PairingKind::Melonic, base, base, c, f)?;
            out.add_scaled(-ct(c), f);
            Ok(out)
        }
        RandomOp::X2nm(c) | RandomOp::RoughX2nm(c) => {
            Ok(partial_pairing(PairingKind::NonMelonic, base, base, c, f)?)
        }
        RandomOp::XdotX | RandomOp::RoughXdotX => Ok(nonlocal_product(base, f, base)?),
        RandomOp::Sym | RandomOp::RoughSym => {
            let span = noise.grid[time_index] - noise.grid[0];
            if !(span > 0.0) {
                return Err(StochasticError::MissingHistory(
                    "the symmetric operator needs history before its time index".into(),
                ));
            }
            let inner = nonlocal_product(base, f, base)?;
            let inverted =
                inner.mapped(|m, z| z * ((1.0 - (-span * hat2(m)).exp()) / hat2(m)));
            Ok(nonlocal_product(base, &inverted, base)?)
        }
    }
}
