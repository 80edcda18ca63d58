//! Modal-superposition model of a pinned-pinned deck span.
//!
//! Every mode is an independent single-degree-of-freedom oscillator driven
//! by the generalized load of the excitation and advanced with its exact
//! zero-order-hold state transition on an internal grid ten times finer
//! than the output rate. Sensors sum the modal responses weighted by
//! sinusoidal shapes, then see noise, range clipping and quantization.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::decay::EXCITATION_OFF_KEY;
use crate::error::{Error, Result};
use crate::records::{ChannelKind, ChannelSpec, TimeSeriesRecord};

pub const GRAVITY: f64 = 9.81;
/// Internal integration steps per output sample.
pub const OVERSAMPLING: usize = 10;
pub const DEFAULT_PULSE_WIDTH: f64 = 0.01;
pub const DEFAULT_SAMPLE_RATE: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Bending,
    Torsion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub label: String,
    pub kind: ModeKind,
    pub shape_index: u32,
    pub frequency: f64,
    pub damping_ratio: f64,
    /// kg for bending, kg m^2 for torsion.
    #[serde(default = "one")]
    pub modal_mass: f64,
}

fn one() -> f64 {
    1.0
}

impl ModeSpec {
    pub fn new(
        label: impl Into<String>,
        kind: ModeKind,
        shape_index: u32,
        frequency: f64,
        damping_ratio: f64,
    ) -> Self {
        ModeSpec {
            label: label.into(),
            kind,
            shape_index,
            frequency,
            damping_ratio,
            modal_mass: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalModel {
    pub span_length: f64,
    pub modes: Vec<ModeSpec>,
    #[serde(default = "default_half_width")]
    pub deck_half_width: f64,
}

fn default_half_width() -> f64 {
    0.1
}

impl ModalModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.span_length > 0.0 && self.span_length.is_finite()) {
            return Err(Error::invalid("model.span_length must be positive"));
        }
        if !(self.deck_half_width > 0.0 && self.deck_half_width.is_finite()) {
            return Err(Error::invalid("model.deck_half_width must be positive"));
        }
        let mut seen = BTreeSet::new();
        for (i, m) in self.modes.iter().enumerate() {
            let at = format!("model.modes[{i}]");
            if !seen.insert(m.label.as_str()) {
                return Err(Error::invalid(format!(
                    "{at}.label: duplicate label {}",
                    m.label
                )));
            }
            if m.shape_index == 0 {
                return Err(Error::invalid(format!(
                    "{at}.shape_index must be at least 1"
                )));
            }
            if !(m.frequency > 0.0 && m.frequency.is_finite()) {
                return Err(Error::invalid(format!("{at}.frequency must be positive")));
            }
            if !(0.0..1.0).contains(&m.damping_ratio) {
                return Err(Error::invalid(format!(
                    "{at}.damping_ratio must lie in [0, 1)"
                )));
            }
            if !(m.modal_mass > 0.0 && m.modal_mass.is_finite()) {
                return Err(Error::invalid(format!("{at}.modal_mass must be positive")));
            }
        }
        Ok(())
    }

    pub fn mode(&self, label: &str) -> Result<&ModeSpec> {
        self.modes
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    fn check_on_span(&self, what: &str, x: f64) -> Result<()> {
        if !(0.0..=self.span_length).contains(&x) {
            return Err(Error::invalid(format!(
                "{what} = {x} m lies outside the span [0, {}] m",
                self.span_length
            )));
        }
        Ok(())
    }
}

/// `sin(pi * x)`, exactly zero at integers and exactly +-1 at half
/// integers.
fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    let (sign, r) = if r >= 1.0 { (-1.0, r - 1.0) } else { (1.0, r) };
    let v = if r == 0.0 {
        0.0
    } else if r == 0.5 {
        1.0
    } else if r < 0.5 {
        (PI * r).sin()
    } else {
        (PI * (1.0 - r)).sin()
    };
    sign * v
}

fn shape_value(mode: &ModeSpec, span: f64, x: f64) -> f64 {
    sin_pi(mode.shape_index as f64 * x / span)
}

/// `sin(k pi x / L)` for the labelled mode; for torsion modes this is the
/// twist-angle shape.
pub fn mode_shape(model: &ModalModel, label: &str, x: f64) -> Result<f64> {
    let mode = model.mode(label)?;
    model.check_on_span("x", x)?;
    Ok(shape_value(mode, model.span_length, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExcitationKind {
    /// A mass dropped from rest onto the deck.
    ImpulseDrop {
        mass: f64,
        drop_height: f64,
        #[serde(default = "default_pulse_width")]
        pulse_width: f64,
    },
    /// An eccentric mass on an oscillating lever arm.
    ServoHarmonic {
        mass: f64,
        arm_length: f64,
        /// Peak arm angle in radians.
        angle_amplitude: f64,
        drive_frequency: f64,
        on_duration: f64,
    },
}

fn default_pulse_width() -> f64 {
    DEFAULT_PULSE_WIDTH
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSpec {
    #[serde(flatten)]
    pub kind: ExcitationKind,
    pub position_x: f64,
    /// Lateral eccentricity from the deck centerline.
    #[serde(default)]
    pub position_y: f64,
}

/// Largest servo drive frequency the actuator supports.
pub const MAX_DRIVE_FREQUENCY: f64 = 10.0;
/// Largest servo arm angle (30 degrees).
pub const MAX_ANGLE_AMPLITUDE: f64 = PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Load {
    pub vertical_force: f64,
    pub torque_about_x: f64,
}

impl ExcitationSpec {
    pub fn impulse(mass: f64, drop_height: f64, position_x: f64, position_y: f64) -> Self {
        ExcitationSpec {
            kind: ExcitationKind::ImpulseDrop {
                mass,
                drop_height,
                pulse_width: DEFAULT_PULSE_WIDTH,
            },
            position_x,
            position_y,
        }
    }

    pub fn servo(
        mass: f64,
        arm_length: f64,
        angle_amplitude: f64,
        drive_frequency: f64,
        on_duration: f64,
        position_x: f64,
        position_y: f64,
    ) -> Self {
        ExcitationSpec {
            kind: ExcitationKind::ServoHarmonic {
                mass,
                arm_length,
                angle_amplitude,
                drive_frequency,
                on_duration,
            },
            position_x,
            position_y,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "excitation.{name} must be positive, got {v}"
                )))
            }
        };
        if !self.position_y.is_finite() {
            return Err(Error::invalid("excitation.position_y must be finite"));
        }
        match self.kind {
            ExcitationKind::ImpulseDrop {
                mass,
                drop_height,
                pulse_width,
            } => {
                positive("mass", mass)?;
                positive("pulse_width", pulse_width)?;
                if !(drop_height >= 0.0 && drop_height.is_finite()) {
                    return Err(Error::invalid(
                        "excitation.drop_height must be non-negative",
                    ));
                }
            }
            ExcitationKind::ServoHarmonic {
                mass,
                arm_length,
                angle_amplitude,
                drive_frequency,
                on_duration,
            } => {
                positive("mass", mass)?;
                positive("arm_length", arm_length)?;
                positive("drive_frequency", drive_frequency)?;
                if drive_frequency > MAX_DRIVE_FREQUENCY {
                    return Err(Error::invalid(format!(
                        "excitation.drive_frequency {drive_frequency} Hz exceeds the actuator limit of {MAX_DRIVE_FREQUENCY} Hz"
                    )));
                }
                if !(0.0..=MAX_ANGLE_AMPLITUDE * (1.0 + 1e-12)).contains(&angle_amplitude) {
                    return Err(Error::invalid(format!(
                        "excitation.angle_amplitude must lie in [0, pi/6] rad, got {angle_amplitude}"
                    )));
                }
                if !(on_duration >= 0.0 && on_duration.is_finite()) {
                    return Err(Error::invalid(
                        "excitation.on_duration must be non-negative",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Total impulse `m sqrt(2 g h)` of a drop; zero for the servo.
    pub fn impulse_magnitude(&self) -> f64 {
        match self.kind {
            ExcitationKind::ImpulseDrop {
                mass, drop_height, ..
            } => mass * (2.0 * GRAVITY * drop_height).sqrt(),
            ExcitationKind::ServoHarmonic { .. } => 0.0,
        }
    }

    /// Time at which the excitation stops acting.
    pub fn off_time(&self) -> f64 {
        match self.kind {
            ExcitationKind::ImpulseDrop { pulse_width, .. } => pulse_width,
            ExcitationKind::ServoHarmonic { on_duration, .. } => on_duration,
        }
    }
}

/// Load at time `t`. The drop is a half-sine pulse of the configured width
/// carrying the full impulse; the servo uses the linearized inertia force
/// of the oscillating arm.
pub fn excitation_force(spec: &ExcitationSpec, t: f64) -> Load {
    let vertical_force = match spec.kind {
        ExcitationKind::ImpulseDrop { pulse_width, .. } => {
            if (0.0..pulse_width).contains(&t) {
                let peak = spec.impulse_magnitude() * PI / (2.0 * pulse_width);
                peak * (PI * t / pulse_width).sin()
            } else {
                0.0
            }
        }
        ExcitationKind::ServoHarmonic {
            mass,
            arm_length,
            angle_amplitude,
            drive_frequency,
            on_duration,
        } => {
            if t >= 0.0 && t < on_duration {
                let w = 2.0 * PI * drive_frequency;
                mass * arm_length * angle_amplitude * w * w * (w * t).sin()
            } else {
                0.0
            }
        }
    };
    Load {
        vertical_force,
        torque_about_x: vertical_force * spec.position_y,
    }
}

/// Additive sensor noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    /// White noise of the given density (channel unit per sqrt(Hz)) over
    /// the band up to Nyquist.
    Density {
        value: f64,
    },
    /// White noise scaled to the given signal-to-noise ratio against each
    /// channel's noiseless RMS.
    SnrDb {
        value: f64,
    },
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::SnrDb { value: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorSpec {
    /// Prefix of the channel ids (`<name>_az`, `<name>_gx`).
    pub name: String,
    pub position_x: f64,
    pub channels: Vec<ChannelKind>,
    /// Accelerometer range in g.
    pub accel_range_g: f64,
    /// Gyroscope range in deg/s.
    pub gyro_range_dps: f64,
    pub sample_rate: f64,
    pub noise: NoiseSpec,
    /// `None` keeps full precision.
    pub quantization_bits: Option<u32>,
    pub rng_seed: Option<u64>,
}

impl Default for SensorSpec {
    fn default() -> Self {
        SensorSpec {
            name: "S".into(),
            position_x: 0.0,
            channels: vec![ChannelKind::AccelerationZ, ChannelKind::AngularVelocityX],
            accel_range_g: 4.0,
            gyro_range_dps: 1000.0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            noise: NoiseSpec::default(),
            quantization_bits: Some(16),
            rng_seed: None,
        }
    }
}

impl SensorSpec {
    pub fn at(name: impl Into<String>, position_x: f64, channels: Vec<ChannelKind>) -> Self {
        SensorSpec {
            name: name.into(),
            position_x,
            channels,
            ..SensorSpec::default()
        }
    }

    /// Noise-free, unquantized copy.
    pub fn ideal(mut self) -> Self {
        self.noise = NoiseSpec::None;
        self.quantization_bits = None;
        self
    }

    fn range_of(&self, kind: ChannelKind) -> f64 {
        match kind {
            ChannelKind::AccelerationZ => self.accel_range_g * GRAVITY,
            ChannelKind::AngularVelocityX => self.gyro_range_dps,
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let at = format!("sensors[{index}]");
        if self.channels.is_empty() {
            return Err(Error::invalid(format!("{at}.channels must not be empty")));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::invalid(format!("{at}.sample_rate must be positive")));
        }
        if !(self.accel_range_g > 0.0) || !(self.gyro_range_dps > 0.0) {
            return Err(Error::invalid(format!("{at}: ranges must be positive")));
        }
        if let Some(bits) = self.quantization_bits {
            if !(2..=32).contains(&bits) {
                return Err(Error::invalid(format!(
                    "{at}.quantization_bits must lie in 2..=32"
                )));
            }
        }
        match self.noise {
            NoiseSpec::None => {}
            NoiseSpec::Density { value } if value >= 0.0 && value.is_finite() => {}
            NoiseSpec::SnrDb { value } if value.is_finite() => {}
            _ => return Err(Error::invalid(format!("{at}.noise has an invalid value"))),
        }
        Ok(())
    }
}

/// Exact zero-order-hold transition of `q'' + 2 zeta w q' + w^2 q = u`.
#[derive(Debug, Clone, Copy)]
struct Sdof {
    phi: [[f64; 2]; 2],
    gamma: [f64; 2],
    omega: f64,
    zeta: f64,
}

impl Sdof {
    fn new(frequency: f64, zeta: f64, h: f64) -> Self {
        let w = 2.0 * PI * frequency;
        let sigma = zeta * w;
        let wd = w * (1.0 - zeta * zeta).sqrt();
        let e = (-sigma * h).exp();
        let (s, c) = (wd * h).sin_cos();
        let phi = [
            [e * (c + sigma / wd * s), e * s / wd],
            [-e * w * w / wd * s, e * (c - sigma / wd * s)],
        ];
        let gamma = [
            (1.0 - phi[1][1] - 2.0 * zeta * w * phi[0][1]) / (w * w),
            phi[0][1],
        ];
        Sdof {
            phi,
            gamma,
            omega: w,
            zeta,
        }
    }

    fn step(&self, x: [f64; 2], u: f64) -> [f64; 2] {
        [
            self.phi[0][0] * x[0] + self.phi[0][1] * x[1] + self.gamma[0] * u,
            self.phi[1][0] * x[0] + self.phi[1][1] * x[1] + self.gamma[1] * u,
        ]
    }

    fn acceleration(&self, x: [f64; 2], u: f64) -> f64 {
        u - 2.0 * self.zeta * self.omega * x[1] - self.omega * self.omega * x[0]
    }
}

/// Modal displacement, velocity and acceleration sampled at `fs`.
#[derive(Debug, Clone)]
pub struct ModalResponse {
    pub label: String,
    pub q: Vec<f64>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
}

/// Integrate every mode and sample the states at `sample_rate`.
pub fn modal_responses(
    model: &ModalModel,
    excitation: &ExcitationSpec,
    sample_rate: f64,
    duration: f64,
) -> Result<Vec<ModalResponse>> {
    model.validate()?;
    excitation.validate()?;
    model.check_on_span("excitation.position_x", excitation.position_x)?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid(format!(
            "duration_s must be positive, got {duration}"
        )));
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::InvalidRate(sample_rate));
    }
    let n = (duration * sample_rate).round() as usize;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let h = 1.0 / (sample_rate * OVERSAMPLING as f64);
    // step-averaged load (Simpson), shared by all modes
    let held: Vec<Load> = (0..n * OVERSAMPLING)
        .map(|j| {
            let t = j as f64 * h;
            let [a, b, c] = [t, t + 0.5 * h, t + h].map(|t| excitation_force(excitation, t));
            Load {
                vertical_force: (a.vertical_force + 4.0 * b.vertical_force + c.vertical_force)
                    / 6.0,
                torque_about_x: (a.torque_about_x + 4.0 * b.torque_about_x + c.torque_about_x)
                    / 6.0,
            }
        })
        .collect();
    let sampled: Vec<Load> = (0..n)
        .map(|k| excitation_force(excitation, k as f64 / sample_rate))
        .collect();

    let out = model
        .modes
        .iter()
        .map(|mode| {
            let sdof = Sdof::new(mode.frequency, mode.damping_ratio, h);
            let weight =
                shape_value(mode, model.span_length, excitation.position_x) / mode.modal_mass;
            let generalized = |l: &Load| match mode.kind {
                ModeKind::Bending => weight * l.vertical_force,
                ModeKind::Torsion => weight * l.torque_about_x,
            };
            let mut resp = ModalResponse {
                label: mode.label.clone(),
                q: Vec::with_capacity(n),
                velocity: Vec::with_capacity(n),
                acceleration: Vec::with_capacity(n),
            };
            let mut x = [0.0, 0.0];
            for k in 0..n {
                resp.q.push(x[0]);
                resp.velocity.push(x[1]);
                resp.acceleration
                    .push(sdof.acceleration(x, generalized(&sampled[k])));
                if k + 1 < n {
                    for load in &held[k * OVERSAMPLING..(k + 1) * OVERSAMPLING] {
                        x = sdof.step(x, generalized(load));
                    }
                }
            }
            resp
        })
        .collect();
    Ok(out)
}

fn channel_suffix(kind: ChannelKind) -> &'static str {
    match kind {
        ChannelKind::AccelerationZ => "az",
        ChannelKind::AngularVelocityX => "gx",
    }
}

/// Simulate one record. All sensors must share a sample rate. Channels are
/// ordered by sensor, then by the sensor's channel list.
pub fn simulate(
    model: &ModalModel,
    excitation: &ExcitationSpec,
    sensors: &[SensorSpec],
    duration: f64,
) -> Result<TimeSeriesRecord> {
    if sensors.is_empty() {
        return Err(Error::invalid("sensors must not be empty"));
    }
    for (i, s) in sensors.iter().enumerate() {
        s.validate(i)?;
        model.check_on_span(&format!("sensors[{i}].position_x"), s.position_x)?;
    }
    let fs = sensors[0].sample_rate;
    if sensors.iter().any(|s| s.sample_rate != fs) {
        return Err(Error::invalid("all sensors must share one sample_rate"));
    }
    let responses = modal_responses(model, excitation, fs, duration)?;
    let n = responses
        .first()
        .map_or((duration * fs).round() as usize, |r| r.q.len());

    let mut specs = Vec::new();
    let mut columns = Vec::new();
    for (si, sensor) in sensors.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(sensor.rng_seed.unwrap_or(si as u64));
        for &kind in &sensor.channels {
            let mut col = vec![0.0; n];
            for (mode, resp) in model.modes.iter().zip(&responses) {
                let phi = shape_value(mode, model.span_length, sensor.position_x);
                let src = match (kind, mode.kind) {
                    (ChannelKind::AccelerationZ, ModeKind::Bending) => &resp.acceleration,
                    (ChannelKind::AngularVelocityX, ModeKind::Torsion) => &resp.velocity,
                    _ => continue,
                };
                let unit = if kind == ChannelKind::AngularVelocityX {
                    180.0 / PI
                } else {
                    1.0
                };
                for (c, v) in col.iter_mut().zip(src) {
                    *c += phi * unit * v;
                }
            }
            let sigma = match sensor.noise {
                NoiseSpec::None => 0.0,
                NoiseSpec::Density { value } => value * (fs / 2.0).sqrt(),
                NoiseSpec::SnrDb { value } => {
                    let rms = (col.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
                    rms * 10f64.powf(-value / 20.0)
                }
            };
            if sigma > 0.0 {
                let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
                for c in col.iter_mut() {
                    *c += normal.sample(&mut rng);
                }
            }
            let range = sensor.range_of(kind);
            let lsb = sensor
                .quantization_bits
                .map(|b| 2.0 * range / 2f64.powi(b as i32));
            for c in col.iter_mut() {
                *c = c.clamp(-range, range);
                if let Some(lsb) = lsb {
                    // `+ 0.0` turns a rounded -0 into 0
                    *c = (*c / lsb).round() * lsb + 0.0;
                }
            }
            specs.push(ChannelSpec::new(
                format!("{}_{}", sensor.name, channel_suffix(kind)),
                kind,
                sensor.position_x,
                0.0,
            ));
            columns.push(col);
        }
    }
    let mut annotations = BTreeMap::new();
    match excitation.kind {
        ExcitationKind::ImpulseDrop { .. } => {
            annotations.insert("excitation".to_string(), "impulse_drop".to_string());
        }
        ExcitationKind::ServoHarmonic {
            drive_frequency,
            on_duration,
            ..
        } => {
            annotations.insert("excitation".to_string(), "servo_harmonic".to_string());
            annotations.insert(
                "drive_frequency_hz".to_string(),
                format!("{drive_frequency:?}"),
            );
            annotations.insert(EXCITATION_OFF_KEY.to_string(), format!("{on_duration:?}"));
        }
    }
    TimeSeriesRecord::with_span(
        fs,
        0.0,
        Some(model.span_length),
        specs,
        columns,
        annotations,
    )
}

/// Everything needed to regenerate one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub model: ModalModel,
    pub excitation: ExcitationSpec,
    pub sensors: Vec<SensorSpec>,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    /// Sensors without an explicit seed get `seed + index`.
    pub fn resolved_sensors(&self) -> Vec<SensorSpec> {
        self.sensors
            .iter()
            .enumerate()
            .map(|(i, s)| SensorSpec {
                rng_seed: Some(s.rng_seed.unwrap_or(self.seed.wrapping_add(i as u64))),
                ..s.clone()
            })
            .collect()
    }

    pub fn run(&self) -> Result<TimeSeriesRecord> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::invalid(format!(
                "duration_s must be positive, got {}",
                self.duration_s
            )));
        }
        simulate(
            &self.model,
            &self.excitation,
            &self.resolved_sensors(),
            self.duration_s,
        )
    }

    /// Drop test on the reference model with the default three-sensor
    /// layout.
    pub fn reference_impulse(position_x: f64, duration_s: f64, seed: u64) -> Self {
        let setup = lillebaelt_default();
        Scenario {
            excitation: ExcitationSpec::impulse(
                IMPULSE_MASS,
                DEFAULT_DROP_HEIGHT,
                position_x,
                DEFAULT_ECCENTRICITY,
            ),
            sensors: setup.default_sensors(),
            model: setup.model,
            duration_s,
            seed,
        }
    }

    /// Servo shaker driven at `drive_frequency` for the on-phase, then free
    /// decay until `duration_s`.
    pub fn reference_servo(drive_frequency: f64, seed: u64) -> Self {
        let setup = lillebaelt_default();
        Scenario {
            excitation: ExcitationSpec::servo(
                SERVO_MASS,
                SERVO_ARM,
                MAX_ANGLE_AMPLITUDE,
                drive_frequency,
                SERVO_ON_DURATION,
                SERVO_POSITION_X,
                DEFAULT_ECCENTRICITY,
            ),
            sensors: setup.default_sensors(),
            model: setup.model,
            duration_s: SERVO_RECORD_DURATION,
            seed,
        }
    }
}

pub const IMPULSE_MASS: f64 = 0.192;
pub const DEFAULT_DROP_HEIGHT: f64 = 0.10;
pub const SERVO_MASS: f64 = 0.024;
pub const SERVO_ARM: f64 = 0.029;
pub const SERVO_POSITION_X: f64 = 1.87;
pub const SERVO_ON_DURATION: f64 = 30.0;
pub const SERVO_RECORD_DURATION: f64 = 120.0;
/// Lateral offset of both exciters from the centerline.
pub const DEFAULT_ECCENTRICITY: f64 = 0.05;

/// Reference model, sensor template and measurement points.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSetup {
    pub model: ModalModel,
    pub sensor: SensorSpec,
    /// Points A to E along the span.
    pub points: Vec<(String, f64)>,
}

impl ReferenceSetup {
    pub fn point(&self, name: &str) -> Option<f64> {
        self.points.iter().find(|p| p.0 == name).map(|p| p.1)
    }

    /// Accelerometers at B and D and a gyroscope at midspan C, which sees
    /// all three bending modes and the torsion mode between them.
    pub fn default_sensors(&self) -> Vec<SensorSpec> {
        let at = |name: &str, kind: ChannelKind| SensorSpec {
            name: name.into(),
            position_x: self.point(name).expect("reference point"),
            channels: vec![kind],
            ..self.sensor.clone()
        };
        vec![
            at("B", ChannelKind::AccelerationZ),
            at("C", ChannelKind::AngularVelocityX),
            at("D", ChannelKind::AccelerationZ),
        ]
    }
}

/// Labels of the reference modes, in table order.
pub const REFERENCE_MODE_LABELS: [&str; 4] = ["f_b1", "f_b2", "f_b3", "f_t1"];

/// The 3 m main span of the reference scale model with its identified
/// frequencies and decrement damping.
pub fn lillebaelt_default() -> ReferenceSetup {
    let span = 3.0;
    let model = ModalModel {
        span_length: span,
        modes: vec![
            ModeSpec::new("f_b1", ModeKind::Bending, 1, 2.263, 0.0037),
            ModeSpec::new("f_b2", ModeKind::Bending, 2, 2.085, 0.0022),
            ModeSpec::new("f_b3", ModeKind::Bending, 3, 3.752, 0.0019),
            ModeSpec::new("f_t1", ModeKind::Torsion, 1, 7.906, 0.0033),
        ],
        deck_half_width: default_half_width(),
    };
    let points = [
        ("A", 1.0 / 6.0),
        ("B", 0.25),
        ("C", 0.5),
        ("D", 0.75),
        ("E", 5.0 / 6.0),
    ]
    .iter()
    .map(|&(n, r)| (n.to_string(), r * span))
    .collect();
    ReferenceSetup {
        model,
        sensor: SensorSpec::default(),
        points,
    }
}
