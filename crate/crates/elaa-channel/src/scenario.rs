//! Scenario parameters and geometry.
//!
//! Everything downstream consumes distances produced here. The array aperture
//! is large relative to the user distance, so link distances are always
//! evaluated per element (spherical wavefront), never once per array.
//!
//! Coordinate system: right-handed, x along the array axis, z vertical,
//! y pointing from the array toward the users. Units are meters throughout.

use rand::Rng;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in 3-D space, `[x, y, z]` in meters.
pub type Point3 = [f64; 3];

/// Physical parameters of the propagation scenario.
///
/// Defaults are the UMi street-canyon configuration: path-loss attenuation
/// and exponent pairs for NLoS (`alpha`, `rho`) and LoS (`beta`, `q`),
/// log-normal Rician K-factor (`mu_kappa`, `sigma_kappa`), log-normal
/// shadowing spreads per state, LoS-probability reference distances
/// (`d1_bar`, `d2_bar`), the NLoS/LoS correlation distance `d_cor`, and the
/// carrier wavelength at 3.5 GHz.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    /// NLoS path-loss attenuation (dimensionless).
    pub alpha: f64,
    /// NLoS path-loss exponent.
    pub rho: f64,
    /// LoS path-loss attenuation (dimensionless).
    pub beta: f64,
    /// LoS path-loss exponent.
    pub q: f64,
    /// Mean of ln(kappa) for the log-normal Rician K-factor.
    pub mu_kappa: f64,
    /// Standard deviation of ln(kappa).
    pub sigma_kappa: f64,
    /// Log-normal spread of LoS shadowing (natural-log standard deviation
    /// of the linear power multiplier, not dB).
    pub sigma_los: f64,
    /// Log-normal spread of NLoS shadowing.
    pub sigma_nlos: f64,
    /// First LoS-probability reference distance, meters.
    pub d1_bar: f64,
    /// Second LoS-probability reference distance, meters.
    pub d2_bar: f64,
    /// NLoS/LoS state correlation distance, meters.
    pub d_cor: f64,
    /// Carrier wavelength, meters.
    pub lambda: f64,
    /// Height of the service antenna array, meters.
    pub antenna_height: f64,
    /// Height of the user antennas, meters.
    pub user_height: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            alpha: 0.020,
            rho: 1.765,
            beta: 0.007,
            q: 1.050,
            mu_kappa: 2.07,
            sigma_kappa: 1.15,
            sigma_los: 0.92,
            sigma_nlos: 1.80,
            d1_bar: 18.0,
            d2_bar: 36.0,
            d_cor: 5_000.0,
            lambda: SPEED_OF_LIGHT / 3.5e9,
            antenna_height: 10.0,
            user_height: 1.5,
        }
    }
}

impl ScenarioParams {
    /// Sets the wavelength from a carrier frequency in Hz.
    pub fn with_frequency(mut self, frequency_hz: f64) -> Self {
        self.lambda = SPEED_OF_LIGHT / frequency_hz;
        self
    }

    /// Half the carrier wavelength; the default element spacing.
    pub fn half_wavelength(&self) -> f64 {
        self.lambda / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("rho", self.rho),
            ("beta", self.beta),
            ("q", self.q),
            ("d1_bar", self.d1_bar),
            ("d2_bar", self.d2_bar),
            ("d_cor", self.d_cor),
            ("lambda", self.lambda),
            ("antenna_height", self.antenna_height),
            ("user_height", self.user_height),
        ];
        for (name, value) in positive {
            Error::require_positive(value, name)?;
        }
        let nonnegative = [
            ("sigma_kappa", self.sigma_kappa),
            ("sigma_los", self.sigma_los),
            ("sigma_nlos", self.sigma_nlos),
        ];
        for (name, value) in nonnegative {
            Error::require_nonnegative(value, name)?;
        }
        if !self.mu_kappa.is_finite() {
            return Err(Error::invalid("mu_kappa must be finite"));
        }
        Ok(())
    }
}

/// Physical arrangement of the service antenna elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayLayout {
    Ula,
    Ura { rows: usize, cols: usize },
}

/// Service antenna positions plus the layout they were built from.
///
/// URA elements are indexed row-major with row 0 the lowest row, so the
/// first `cols` elements are always the bottom row.
#[derive(Debug, Clone)]
pub struct ArrayGeometry {
    pub layout: ArrayLayout,
    /// Inter-element spacing, meters.
    pub spacing: f64,
    pub element_positions: Vec<Point3>,
}

impl ArrayGeometry {
    /// Number of service antennas M.
    pub fn len(&self) -> usize {
        self.element_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element_positions.is_empty()
    }

    /// Total extent along the array axis: (M-1) * spacing for a ULA.
    pub fn aperture(&self) -> f64 {
        match self.layout {
            ArrayLayout::Ula => (self.len().saturating_sub(1)) as f64 * self.spacing,
            ArrayLayout::Ura { cols, .. } => (cols.saturating_sub(1)) as f64 * self.spacing,
        }
    }
}

/// Builds a uniform linear array along the x axis.
///
/// Element m sits at `origin + [m * spacing, 0, 0]` with its z coordinate
/// replaced by `height`.
pub fn build_ula(m: usize, spacing: f64, origin: Point3, height: f64) -> Result<ArrayGeometry> {
    if m < 1 {
        return Err(Error::invalid("antenna count M must be >= 1"));
    }
    Error::require_positive(spacing, "element spacing")?;
    let element_positions = (0..m)
        .map(|i| [origin[0] + i as f64 * spacing, origin[1], height])
        .collect();
    Ok(ArrayGeometry {
        layout: ArrayLayout::Ula,
        spacing,
        element_positions,
    })
}

/// Builds a uniform rectangular array in the x-z plane.
///
/// Element (r, c) sits at `origin + [c * spacing, 0, 0]` at height
/// `height + r * spacing`; the flat index is `r * cols + c` (row-major,
/// lowest row first).
pub fn build_ura(
    rows: usize,
    cols: usize,
    spacing: f64,
    origin: Point3,
    height: f64,
) -> Result<ArrayGeometry> {
    if rows < 1 || cols < 1 {
        return Err(Error::invalid("URA dimensions must be >= 1"));
    }
    Error::require_positive(spacing, "element spacing")?;
    let mut element_positions = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            element_positions.push([
                origin[0] + c as f64 * spacing,
                origin[1],
                height + r as f64 * spacing,
            ]);
        }
    }
    Ok(ArrayGeometry {
        layout: ArrayLayout::Ura { rows, cols },
        spacing,
        element_positions,
    })
}

/// 3-D Euclidean distance. This is the per-link distance d_m when `a` is a
/// user antenna and `b` a service antenna.
pub fn distance_3d(a: Point3, b: Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Horizontal-plane distance: heights are ignored, per the 3GPP definition
/// of the 2-D distance used by the LoS probability curve.
pub fn distance_2d(a: Point3, b: Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// User density regimes of the capacity study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    /// All users within a 1-meter range; they share one NLoS/LoS state vector.
    High,
    /// Users spread over a 20-meter range with independent state vectors.
    Low,
}

impl DensityMode {
    /// Length of the user line segment for this regime, meters.
    pub fn line_range(self) -> f64 {
        match self {
            DensityMode::High => 1.0,
            DensityMode::Low => 20.0,
        }
    }
}

/// Placement of the users: K single-position users (each carrying
/// `antennas_per_user` co-located antennas) drawn uniformly on a line
/// segment parallel to the ULA.
#[derive(Debug, Clone)]
pub struct UserLayout {
    /// Number of users K.
    pub users: usize,
    /// Antennas per user N; total transmit antennas is K * N.
    pub antennas_per_user: usize,
    pub density: DensityMode,
    /// Length of the user line segment, meters.
    pub line_range: f64,
    /// Midpoint of the segment; its z coordinate is the user height.
    pub line_center: Point3,
}

impl UserLayout {
    /// Layout with the line range implied by the density mode.
    pub fn new(
        users: usize,
        antennas_per_user: usize,
        density: DensityMode,
        line_center: Point3,
    ) -> Self {
        UserLayout {
            users,
            antennas_per_user,
            density,
            line_range: density.line_range(),
            line_center,
        }
    }

    pub fn total_antennas(&self) -> usize {
        self.users * self.antennas_per_user
    }
}

/// Draws the K user positions i.i.d. uniform on the configured segment.
pub fn place_users<R: Rng + ?Sized>(layout: &UserLayout, rng: &mut R) -> Result<Vec<Point3>> {
    if layout.users == 0 {
        return Err(Error::invalid("user count K must be >= 1"));
    }
    Error::require_positive(layout.line_range, "line_range")?;
    let half = layout.line_range / 2.0;
    let [cx, cy, cz] = layout.line_center;
    Ok((0..layout.users)
        .map(|_| {
            let x = cx + rng.gen_range(-half..half);
            [x, cy, cz]
        })
        .collect())
}

/// Special-case switches applied by the model presets.
///
/// `p_los` replaces the distance-dependent LoS probability with a constant;
/// `unit_distance` fixes every link distance at 1 m, which together with
/// `alpha = 1` turns the channel into the classical i.i.d. ensemble.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModelOverrides {
    pub p_los: Option<f64>,
    pub unit_distance: bool,
}
