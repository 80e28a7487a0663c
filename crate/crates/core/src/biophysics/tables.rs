//! Tabulated absorption data, 400–700 nm in 10 nm steps.
//!
//! Molar extinction coefficients of oxy- and deoxy-hemoglobin in
//! cm⁻¹/(mol/L), as compiled by S. Prahl (Oregon Medical Laser Center) from
//! Gratzer and Kollias.

pub const TABLE_START_NM: f64 = 400.0;
pub const TABLE_STEP_NM: f64 = 10.0;

/// `[HbO2, Hb]` per wavelength.
pub const HEMOGLOBIN_EXTINCTION: [[f64; 2]; 31] = [
    [266232.0, 223296.0],
    [466840.0, 304016.0],
    [480360.0, 407560.0],
    [224264.0, 528600.0],
    [109600.0, 413280.0],
    [62816.0, 103292.0],
    [44480.0, 23388.8],
    [33209.2, 16156.4],
    [26629.2, 14550.0],
    [23684.4, 16684.0],
    [20932.8, 20035.2],
    [20035.2, 25773.6],
    [24202.4, 31589.6],
    [39956.8, 39036.4],
    [53236.0, 46592.0],
    [43016.0, 53412.0],
    [32613.2, 53788.0],
    [44496.0, 45072.0],
    [50104.0, 37020.0],
    [14400.8, 28324.4],
    [3200.0, 14677.2],
    [1506.0, 9443.6],
    [942.0, 6509.6],
    [610.0, 5148.8],
    [442.0, 4345.2],
    [368.0, 3750.12],
    [319.6, 3226.56],
    [294.0, 2795.12],
    [277.6, 2407.92],
    [276.0, 2051.96],
    [290.0, 1794.28],
];

/// Molar mass of hemoglobin, g/mol.
pub const HEMOGLOBIN_MOLAR_MASS: f64 = 64_500.0;

/// Hemoglobin concentration inside red cells, g/L; scaled by `f_hg`.
pub const CELL_HEMOGLOBIN_G_PER_L: f64 = 340.0;

/// Oxygen saturation assumed for dermal blood.
pub const OXYGEN_SATURATION: f64 = 0.75;

/// Melanosome absorption `6.6e11·λ^-3.33` cm⁻¹ (Jacques).
pub fn melanin_absorption(nm: f64) -> f64 {
    6.6e11 * nm.powf(-3.33)
}

/// Bloodless tissue background absorption, cm⁻¹ (Jacques).
pub fn baseline_absorption(nm: f64) -> f64 {
    0.244 + 85.3 * (-(nm - 154.0) / 66.2).exp()
}

/// Reduced scattering of dermis, cm⁻¹: Mie plus Rayleigh terms.
pub fn dermal_scattering(nm: f64) -> f64 {
    2.0e5 * nm.powf(-1.5) + 2.0e12 * nm.powi(-4)
}

/// Linear interpolation in the hemoglobin table.
pub fn hemoglobin_extinction(nm: f64) -> [f64; 2] {
    let pos = ((nm - TABLE_START_NM) / TABLE_STEP_NM).clamp(0.0, 30.0);
    let i = (pos.floor() as usize).min(29);
    let t = pos - i as f64;
    let (a, b) = (HEMOGLOBIN_EXTINCTION[i], HEMOGLOBIN_EXTINCTION[i + 1]);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Absorption of whole blood, cm⁻¹, for hemoglobin fraction `f_hg`.
pub fn blood_absorption(nm: f64, f_hg: f64) -> f64 {
    let [oxy, deoxy] = hemoglobin_extinction(nm);
    let eps = OXYGEN_SATURATION * oxy + (1.0 - OXYGEN_SATURATION) * deoxy;
    let molar = f_hg * CELL_HEMOGLOBIN_G_PER_L / HEMOGLOBIN_MOLAR_MASS;
    std::f64::consts::LN_10 * eps * molar
}
