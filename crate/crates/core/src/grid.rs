//! Integer-lattice real-space grids, particle registers and the enumerated
//! many-body configuration basis.
//!
//! A grid with `m` points per axis (odd) labels sites by integer vectors in
//! `[-(m-1)/2, (m-1)/2]^d`; site `p` sits at coordinate `p · L/m`, strictly
//! inside the box `[-L/2, L/2]^d`. A basis state assigns one site (and, where
//! enabled, one spin) to every particle register. Basis indices are mixed
//! radix with particle 0 most significant; within a particle the site index
//! comes before the spin bit, and within a site axis 0 is most significant.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::{Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Default cap on the dense basis dimension.
pub const DEFAULT_BASIS_CAP: usize = 4096;

/// Integer lattice point; axes beyond the grid dimension are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Site(pub [i64; 3]);

impl Site {
    pub fn new_1d(x: i64) -> Self {
        Site([x, 0, 0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn bit(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    fn from_bit(b: usize) -> Self {
        if b == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    points_per_axis: usize,
    dims: usize,
    box_length: f64,
}

impl GridSpec {
    pub fn new(points_per_axis: usize, dims: usize, box_length: f64) -> Result<Self> {
        if points_per_axis == 0 || points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be odd and positive, got {points_per_axis}"
            )));
        }
        if !(1..=3).contains(&dims) {
            return Err(Error::InvalidGrid(format!("dims must be 1, 2 or 3, got {dims}")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {box_length}")));
        }
        Ok(Self { points_per_axis, dims, box_length })
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Number of grid points N = m^d.
    pub fn n_points(&self) -> usize {
        self.points_per_axis.pow(self.dims as u32)
    }

    /// Largest label along an axis, (m-1)/2.
    pub fn half_width(&self) -> i64 {
        (self.points_per_axis as i64 - 1) / 2
    }

    /// Lattice spacing L/m.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.points_per_axis as f64
    }

    /// Box volume L^d.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dims as i32)
    }

    pub fn contains(&self, site: Site) -> bool {
        let h = self.half_width();
        site.0
            .iter()
            .enumerate()
            .all(|(w, &x)| if w < self.dims { x.abs() <= h } else { x == 0 })
    }

    pub fn check_site(&self, site: Site) -> Result<()> {
        let h = self.half_width();
        for (w, &x) in site.0.iter().enumerate() {
            let bad = if w < self.dims { x.abs() > h } else { x != 0 };
            if bad {
                return Err(Error::LabelOutOfRange { label: x, half: if w < self.dims { h } else { 0 } });
            }
        }
        Ok(())
    }

    /// Coordinate of a lattice site in Bohr, `p · L/m` per axis.
    pub fn label_to_coord(&self, site: Site) -> Result<[f64; 3]> {
        self.check_site(site)?;
        Ok(self.coord_unchecked(site))
    }

    pub(crate) fn coord_unchecked(&self, site: Site) -> [f64; 3] {
        let a = self.spacing();
        [site.0[0] as f64 * a, site.0[1] as f64 * a, site.0[2] as f64 * a]
    }

    /// Lexicographic index of a site, axis 0 most significant.
    pub fn site_index(&self, site: Site) -> Result<usize> {
        self.check_site(site)?;
        let m = self.points_per_axis as i64;
        let h = self.half_width();
        let mut idx = 0i64;
        for w in 0..self.dims {
            idx = idx * m + (site.0[w] + h);
        }
        Ok(idx as usize)
    }

    pub fn site_at(&self, mut index: usize) -> Site {
        let m = self.points_per_axis;
        let h = self.half_width();
        let mut out = [0i64; 3];
        for w in (0..self.dims).rev() {
            out[w] = (index % m) as i64 - h;
            index /= m;
        }
        Site(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleKind {
    Electron,
    Nucleus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub kind: ParticleKind,
    /// Mass in electron masses.
    pub mass: f64,
    /// Charge in elementary charges.
    pub charge: f64,
    /// Whether the register carries a spin-1/2 label.
    pub spin: bool,
}

impl Particle {
    pub fn electron(spin: bool) -> Self {
        Self { kind: ParticleKind::Electron, mass: 1.0, charge: -1.0, spin }
    }

    pub fn nucleus(mass: f64, charge: f64, spin: bool) -> Self {
        Self { kind: ParticleKind::Nucleus, mass, charge, spin }
    }

    fn spin_factor(&self) -> usize {
        if self.spin {
            2
        } else {
            1
        }
    }

    /// Same mass, charge, kind and spin flag.
    pub fn same_species(&self, other: &Particle) -> bool {
        self.kind == other.kind
            && self.mass == other.mass
            && self.charge == other.charge
            && self.spin == other.spin
    }
}

/// Ordered particle registers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
}

impl ParticleSet {
    pub fn new(particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidParticles("no particles".to_string()));
        }
        for (i, p) in particles.iter().enumerate() {
            if !(p.mass.is_finite() && p.mass > 0.0) {
                return Err(Error::InvalidParticles(format!("particle {i} has mass {}", p.mass)));
            }
            if !p.charge.is_finite() {
                return Err(Error::InvalidParticles(format!("particle {i} has non-finite charge")));
            }
            if p.kind == ParticleKind::Electron && (p.mass != 1.0 || p.charge != -1.0) {
                return Err(Error::InvalidParticles(format!(
                    "electron {i} must have mass 1 and charge -1"
                )));
            }
        }
        Ok(Self { particles })
    }

    /// `n_el` electrons followed by the given nuclei.
    pub fn molecular(n_el: usize, electron_spin: bool, nuclei: &[Particle]) -> Result<Self> {
        let mut v: Vec<Particle> = (0..n_el).map(|_| Particle::electron(electron_spin)).collect();
        v.extend_from_slice(nuclei);
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn get(&self, i: usize) -> &Particle {
        &self.particles[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Particle> {
        self.particles.iter()
    }

    pub fn n_el(&self) -> usize {
        self.particles.iter().filter(|p| p.kind == ParticleKind::Electron).count()
    }

    pub fn n_nuc(&self) -> usize {
        self.particles.iter().filter(|p| p.kind == ParticleKind::Nucleus).count()
    }

    /// Register indices of the nuclei, in order.
    pub fn nucleus_registers(&self) -> Vec<usize> {
        self.particles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.kind == ParticleKind::Nucleus)
            .map(|(i, _)| i)
            .collect()
    }

    /// Registers `indices` in the given order as a new set.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut v = Vec::with_capacity(indices.len());
        for &i in indices {
            let p = self.particles.get(i).ok_or_else(|| {
                Error::InvalidParticles(format!("register {i} out of range for {}", self.len()))
            })?;
            v.push(*p);
        }
        Self::new(v)
    }
}

/// One basis label: per-register sites and spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub sites: Vec<Site>,
    /// `None` for registers without spin.
    pub spins: Vec<Option<Spin>>,
}

impl Configuration {
    pub fn spinless(sites: Vec<Site>) -> Self {
        let spins = alloc::vec![None; sites.len()];
        Self { sites, spins }
    }
}

/// Enumerated configuration basis over a grid and particle set.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    grid: GridSpec,
    particles: ParticleSet,
    local_dims: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl Basis {
    pub fn new(grid: GridSpec, particles: ParticleSet) -> Result<Self> {
        Self::with_cap(grid, particles, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(grid: GridSpec, particles: ParticleSet, cap: usize) -> Result<Self> {
        let n = grid.n_points() as u128;
        let local_dims: Vec<usize> =
            particles.iter().map(|p| grid.n_points() * p.spin_factor()).collect();
        let mut size: Option<u128> = Some(1);
        for p in particles.iter() {
            size = size.and_then(|s| s.checked_mul(n * p.spin_factor() as u128));
        }
        match size {
            Some(s) if s <= cap as u128 => {}
            Some(s) => return Err(Error::DimensionCapExceeded { size: s.to_string(), cap }),
            None => {
                return Err(Error::DimensionCapExceeded {
                    size: format!("> {}", u128::MAX),
                    cap,
                })
            }
        }
        let mut strides = alloc::vec![1usize; local_dims.len()];
        for i in (0..local_dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * local_dims[i + 1];
        }
        let size = local_dims.iter().product();
        Ok(Self { grid, particles, local_dims, strides, size })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.particles
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_registers(&self) -> usize {
        self.local_dims.len()
    }

    pub fn local_dim(&self, register: usize) -> usize {
        self.local_dims[register]
    }

    pub(crate) fn stride(&self, register: usize) -> usize {
        self.strides[register]
    }

    /// Local (site, spin) index of `register` in basis state `index`.
    pub fn local_index(&self, index: usize, register: usize) -> usize {
        (index / self.strides[register]) % self.local_dims[register]
    }

    pub fn site_of(&self, index: usize, register: usize) -> Site {
        let local = self.local_index(index, register);
        let sf = if self.particles.get(register).spin { 2 } else { 1 };
        self.grid.site_at(local / sf)
    }

    pub fn spin_of(&self, index: usize, register: usize) -> Option<Spin> {
        if self.particles.get(register).spin {
            Some(Spin::from_bit(self.local_index(index, register) % 2))
        } else {
            None
        }
    }

    /// Coordinates of every register in basis state `index`.
    pub fn coords(&self, index: usize) -> Vec<[f64; 3]> {
        (0..self.n_registers())
            .map(|r| self.grid.coord_unchecked(self.site_of(index, r)))
            .collect()
    }

    pub fn configuration_at(&self, index: usize) -> Configuration {
        let n = self.n_registers();
        Configuration {
            sites: (0..n).map(|r| self.site_of(index, r)).collect(),
            spins: (0..n).map(|r| self.spin_of(index, r)).collect(),
        }
    }

    pub fn index_of(&self, config: &Configuration) -> Result<usize> {
        let n = self.n_registers();
        if config.sites.len() != n || config.spins.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: config.sites.len() });
        }
        let mut idx = 0usize;
        for r in 0..n {
            let site = self.grid.site_index(config.sites[r])?;
            let local = match (self.particles.get(r).spin, config.spins[r]) {
                (true, Some(s)) => 2 * site + s.bit(),
                (false, None) => site,
                (true, None) => {
                    return Err(Error::InvalidState(format!("register {r} needs a spin label")))
                }
                (false, Some(_)) => return Err(Error::SpinNotEnabled(r)),
            };
            idx += local * self.strides[r];
        }
        Ok(idx)
    }

    /// Basis index after replacing the local state of `register`.
    pub(crate) fn with_local(&self, index: usize, register: usize, local: usize) -> usize {
        let old = self.local_index(index, register);
        index - old * self.strides[register] + local * self.strides[register]
    }
}

/// All configurations in basis order.
pub fn enumerate_basis(grid: GridSpec, particles: ParticleSet) -> Result<Vec<Configuration>> {
    let basis = Basis::new(grid, particles)?;
    Ok((0..basis.size()).map(|i| basis.configuration_at(i)).collect())
}
