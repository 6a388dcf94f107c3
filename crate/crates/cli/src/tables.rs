//! Published reference values the benchmark suites compare against.

/// Point counts of the star and L2 tables (`20, 60, ..., 1020`).
pub const SWEEP_N: [usize; 26] = [
    20, 60, 100, 140, 180, 220, 260, 300, 340, 380, 420, 460, 500, 540, 580, 620, 660, 700, 740, 780, 820, 860, 900,
    940, 980, 1020,
];

pub const STAR_HALTON: [f64; 26] = [
    0.17384, 0.06535, 0.05024, 0.03686, 0.03200, 0.02323, 0.02062, 0.01994, 0.01950, 0.01659, 0.01617, 0.01279,
    0.01172, 0.01101, 0.01005, 0.00957, 0.00949, 0.00841, 0.00709, 0.00685, 0.00718, 0.00710, 0.00571, 0.00626,
    0.00619, 0.00636,
];
pub const STAR_SOBOL: [f64; 26] = [
    0.13125, 0.06583, 0.04617, 0.03306, 0.02466, 0.02420, 0.02571, 0.01851, 0.01280, 0.01442, 0.01326, 0.01225,
    0.01289, 0.00967, 0.00967, 0.00977, 0.01064, 0.00724, 0.00765, 0.00697, 0.00691, 0.00772, 0.00638, 0.00637,
    0.00640, 0.00616,
];
pub const STAR_SUBSET_SELECTION: [f64; 26] = [
    0.08799, 0.05469, 0.02860, 0.02439, 0.02028, 0.01499, 0.01339, 0.01527, 0.01175, 0.01089, 0.01073, 0.00950,
    0.00898, 0.00800, 0.00927, 0.00802, 0.00727, 0.00680, 0.00664, 0.00582, 0.00626, 0.00626, 0.00602, 0.00536,
    0.00457, 0.00488,
];
pub const STAR_HAMMERSLEY: [f64; 26] = [
    0.12304, 0.04941, 0.03136, 0.02292, 0.01842, 0.01512, 0.01308, 0.01164, 0.01056, 0.00945, 0.00855, 0.00803,
    0.00739, 0.00685, 0.00637, 0.00596, 0.00578, 0.00545, 0.00523, 0.00496, 0.00472, 0.00450, 0.00431, 0.00413,
    0.00396, 0.00380,
];
pub const STAR_LIFTED_SOBOL: [f64; 26] = [
    0.11875, 0.04609, 0.02766, 0.02388, 0.01501, 0.01584, 0.01221, 0.01294, 0.00837, 0.00994, 0.00915, 0.00849,
    0.00721, 0.00642, 0.00645, 0.00534, 0.00759, 0.00509, 0.00466, 0.00547, 0.00441, 0.00422, 0.00450, 0.00373,
    0.00471, 0.00362,
];
pub const STAR_FIBONACCI: [f64; 26] = [
    0.11885, 0.04422, 0.02749, 0.02128, 0.01655, 0.01354, 0.01200, 0.01054, 0.00957, 0.00857, 0.00775, 0.00708,
    0.00651, 0.00603, 0.00561, 0.00525, 0.00509, 0.00480, 0.00484, 0.00459, 0.00436, 0.00416, 0.00398, 0.00381,
    0.00365, 0.00351,
];
pub const STAR_MPMC: [f64; 26] = [
    0.06664, 0.02729, 0.01879, 0.01373, 0.01147, 0.00975, 0.00843, 0.00752, 0.00710, 0.00695, 0.00584, 0.00540,
    0.00518, 0.00488, 0.00476, 0.00454, 0.00437, 0.00416, 0.00397, 0.00376, 0.00360, 0.00356, 0.00319, 0.00321,
    0.00308, 0.00303,
];

pub const L2_HALTON: [f64; 26] = [
    0.06511, 0.01323, 0.00751, 0.00627, 0.00460, 0.00434, 0.00389, 0.00343, 0.00292, 0.00238, 0.00266, 0.00215,
    0.00226, 0.00182, 0.00179, 0.00164, 0.00171, 0.00190, 0.00179, 0.00139, 0.00122, 0.00139, 0.00126, 0.00147,
    0.00117, 0.00107,
];
pub const L2_SOBOL: [f64; 26] = [
    0.03564, 0.01660, 0.01006, 0.00645, 0.00551, 0.00690, 0.00655, 0.00435, 0.00276, 0.00330, 0.00267, 0.00258,
    0.00242, 0.00220, 0.00216, 0.00157, 0.00152, 0.00198, 0.00164, 0.00138, 0.00196, 0.00155, 0.00154, 0.00130,
    0.00125, 0.00121,
];
pub const L2_SUBSET_SELECTION: [f64; 26] = [
    0.02569, 0.01541, 0.00823, 0.00693, 0.00530, 0.00397, 0.00352, 0.00410, 0.00310, 0.00276, 0.00266, 0.00250,
    0.00221, 0.00206, 0.00228, 0.00205, 0.00178, 0.00166, 0.00167, 0.00141, 0.00151, 0.00153, 0.00152, 0.00136,
    0.00112, 0.00120,
];
pub const L2_HAMMERSLEY: [f64; 26] = [
    0.04796, 0.01812, 0.01119, 0.00833, 0.00664, 0.00554, 0.00469, 0.00416, 0.00371, 0.00335, 0.00305, 0.00283,
    0.00262, 0.00243, 0.00224, 0.00211, 0.00200, 0.00190, 0.00181, 0.00173, 0.00165, 0.00158, 0.00152, 0.00146,
    0.00140, 0.00135,
];
pub const L2_FIBONACCI: [f64; 26] = [
    0.04324, 0.01465, 0.00870, 0.00657, 0.00492, 0.00399, 0.00344, 0.00306, 0.00275, 0.00249, 0.00221, 0.00198,
    0.00182, 0.00168, 0.00155, 0.00145, 0.00139, 0.00132, 0.00127, 0.00121, 0.00115, 0.00110, 0.00107, 0.00103,
    0.00099, 0.00094,
];
pub const L2_MPMC: [f64; 26] = [
    0.02016, 0.00756, 0.00479, 0.00353, 0.00284, 0.00241, 0.00203, 0.00179, 0.00162, 0.00154, 0.00135, 0.00122,
    0.00117, 0.00104, 0.00104, 0.00098, 0.00090, 0.00087, 0.00088, 0.00082, 0.00080, 0.00074, 0.00075, 0.00072,
    0.00072, 0.00068,
];

/// Star discrepancy for `N = 1..=21` in two dimensions.
#[allow(clippy::approx_constant)]
pub const OPT2_FIBONACCI: [f64; 21] = [
    1.0, 0.6909, 0.5880, 0.4910, 0.3528, 0.3183, 0.2728, 0.2553, 0.2270, 0.2042, 0.1857, 0.1702, 0.1571, 0.1459,
    0.1390, 0.1486, 0.1398, 0.1320, 0.1251, 0.1188, 0.1131,
];
/// Smallest attainable star discrepancy; the first entry is `1/φ`.
pub const OPT2_OPTIMAL: [f64; 21] = [
    0.6180339887498949, 0.3660, 0.2847, 0.2500, 0.2000, 0.1667, 0.1500, 0.1328, 0.1235, 0.1111, 0.1030, 0.0952,
    0.0889, 0.0837, 0.0782, 0.0739, 0.0699, 0.0666, 0.0634, 0.0604, 0.0580,
];
pub const OPT2_MPMC: [f64; 21] = [
    0.6180339887498949, 0.3660, 0.2847, 0.2500, 0.2000, 0.1692, 0.1508, 0.1354, 0.1240, 0.1124, 0.1058, 0.0975,
    0.0908, 0.0853, 0.0794, 0.0768, 0.0731, 0.0699, 0.0668, 0.0640, 0.0606,
];

/// Star discrepancy for `N = 1..=8` in three dimensions.
pub const OPT3_OPTIMAL: [f64; 8] = [0.6823, 0.4239, 0.3445, 0.3038, 0.2618, 0.2326, 0.2090, 0.1875];
pub const OPT3_MPMC: [f64; 8] = [0.6833, 0.4239, 0.3491, 0.3071, 0.2669, 0.2371, 0.2158, 0.1993];

/// Absolute pricing errors of the 32-dimensional Asian option.
pub const ASIAN_N: [usize; 6] = [32, 64, 128, 256, 512, 1024];
pub const ASIAN_HAMMERSLEY: [f64; 6] = [6.449, 4.125, 3.575, 2.817, 1.947, 1.296];
pub const ASIAN_LATTICE: [f64; 6] = [5.636, 4.638, 1.331, 2.151, 0.180, 0.203];
pub const ASIAN_SOBOL: [f64; 6] = [1.235, 1.373, 0.965, 0.623, 0.497, 0.290];
pub const ASIAN_MPMC: [f64; 6] = [1.402, 0.831, 0.512, 0.250, 0.120, 0.055];
/// Price estimated from two million Sobol' points.
pub const ASIAN_REFERENCE_PRICE: f64 = 7.06574;

/// Mean L2 discrepancy of models trained without message passing (`r = 0`).
pub const DEEPSET_L2: [(usize, f64); 3] = [(64, 0.073), (128, 0.058), (1024, 0.063)];
