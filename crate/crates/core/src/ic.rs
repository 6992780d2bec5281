//! Built-in initial conditions.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{inner_unchecked, Grid, RealField};

/// Named initial condition with its numeric parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Constant(f64),
    /// `(sin 2x cos 2y)/4 + 0.48`.
    SmoothTrig,
    /// Sum of tanh bumps `tanh((r_i - |x - c_i|)/(sqrt2 eps))` plus `k - 1`.
    Bubbles {
        spheres: Vec<Sphere>,
        width: f64,
    },
    /// `m` Voronoi indicator fields, each scaled to unit L2 norm.
    PartitionMarkers {
        components: usize,
        seed: u64,
    },
    /// Random trigonometric polynomial with `|k_i| <= kmax`, rescaled so
    /// `max |phi - mean| = amplitude`. One field per component.
    RandomSmooth {
        mean: f64,
        amplitude: f64,
        kmax: usize,
        components: usize,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sphere {
    pub radius: f64,
    pub center: [f64; 3],
}

pub const NAMES: [&str; 7] = [
    "two_circles_2d",
    "four_spheres_3d",
    "six_spheres_3d",
    "smooth_trig",
    "partition_markers",
    "constant",
    "random_smooth",
];

fn spheres_from(params: &[f64], dims: usize, name: &str) -> Result<Vec<Sphere>> {
    let per = dims + 1;
    if params.is_empty() || params.len() % per != 0 {
        return Err(Error::InvalidModel(format!(
            "{name}: expected a multiple of {per} parameters (r, center...), got {}",
            params.len()
        )));
    }
    Ok(params
        .chunks(per)
        .map(|c| {
            let mut center = [0.0; 3];
            center[..dims].copy_from_slice(&c[1..]);
            Sphere {
                radius: c[0],
                center,
            }
        })
        .collect())
}

fn defaults(name: &str) -> Vec<Sphere> {
    let s = |r: f64, x: f64, y: f64| Sphere {
        radius: r,
        center: [x, y, 0.0],
    };
    match name {
        "two_circles_2d" => vec![s(0.28 * PI, 0.0, 0.35 * PI), s(0.28 * PI, 0.0, -0.35 * PI)],
        "four_spheres_3d" => [0.25, -0.25, 0.75, -0.75]
            .iter()
            .map(|&y| s(PI / 6.0, 0.0, y * PI))
            .collect(),
        _ => [
            (-0.25, -0.25),
            (0.25, -0.25),
            (0.0, 0.25),
            (0.5, 0.25),
            (-0.5, 0.25),
            (0.0, -0.75),
        ]
        .iter()
        .map(|&(x, y)| s(PI / 6.0, x * PI, y * PI))
        .collect(),
    }
}

impl InitialCondition {
    /// Build from a name and parameter list. `width` is the tanh interface
    /// width, `components` the number of fields, `seed` the RNG seed.
    ///
    /// Parameter lists (empty means defaults where allowed):
    /// `constant: c`; `smooth_trig: -`; `two_circles_2d: (r x y)*`;
    /// `four_spheres_3d`, `six_spheres_3d: (r x y z)*`;
    /// `partition_markers: -`; `random_smooth: mean amplitude kmax`.
    pub fn from_name(
        name: &str,
        params: &[f64],
        width: f64,
        components: usize,
        seed: u64,
    ) -> Result<Self> {
        let count = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!(
                    "{name}: expected {n} parameters, got {}",
                    params.len()
                )))
            }
        };
        let bubbles = |dims: usize| -> Result<Self> {
            if !(width > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "{name}: interface width must be > 0"
                )));
            }
            let spheres = if params.is_empty() {
                defaults(name)
            } else {
                spheres_from(params, dims, name)?
            };
            Ok(InitialCondition::Bubbles { spheres, width })
        };
        match name {
            "constant" => {
                count(1)?;
                Ok(InitialCondition::Constant(params[0]))
            }
            "smooth_trig" => {
                count(0)?;
                Ok(InitialCondition::SmoothTrig)
            }
            "two_circles_2d" => bubbles(2),
            "four_spheres_3d" | "six_spheres_3d" => bubbles(3),
            "partition_markers" => {
                count(0)?;
                Ok(InitialCondition::PartitionMarkers { components, seed })
            }
            "random_smooth" => {
                let (mean, amplitude, kmax) = match params.len() {
                    0 => (0.0, 1.0, 4),
                    3 => {
                        let k = params[2];
                        if !(k >= 1.0 && k.fract() == 0.0) {
                            return Err(Error::InvalidModel(format!(
                                "random_smooth: kmax must be a positive integer, got {k}"
                            )));
                        }
                        (params[0], params[1], k as usize)
                    }
                    n => {
                        return Err(Error::InvalidModel(format!(
                            "random_smooth: expected 0 or 3 parameters, got {n}"
                        )))
                    }
                };
                Ok(InitialCondition::RandomSmooth {
                    mean,
                    amplitude,
                    kmax,
                    components,
                    seed,
                })
            }
            other => Err(Error::InvalidModel(format!(
                "unknown initial condition '{other}' (known: {})",
                NAMES.join(", ")
            ))),
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<Vec<RealField>> {
        match self {
            InitialCondition::Constant(c) => Ok(vec![RealField::constant(grid, *c)]),
            InitialCondition::SmoothTrig => Ok(vec![RealField::from_fn(grid, |x| {
                (2.0 * x[0]).sin() * (2.0 * x[1]).cos() / 4.0 + 0.48
            })]),
            InitialCondition::Bubbles { spheres, width } => {
                let offset = spheres.len() as f64 - 1.0;
                let d = grid.dims();
                Ok(vec![RealField::from_fn(grid, |x| {
                    spheres
                        .iter()
                        .map(|s| {
                            let r2: f64 = (0..d).map(|a| (x[a] - s.center[a]).powi(2)).sum();
                            ((s.radius - r2.sqrt()) / (SQRT_2 * width)).tanh()
                        })
                        .sum::<f64>()
                        + offset
                })])
            }
            InitialCondition::PartitionMarkers { components, seed } => {
                markers(grid, *components, *seed)
            }
            InitialCondition::RandomSmooth {
                mean,
                amplitude,
                kmax,
                components,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*components)
                    .map(|_| Ok(random_field(grid, *mean, *amplitude, *kmax, &mut rng)))
                    .collect()
            }
        }
    }
}

fn random_field(
    grid: &Grid,
    mean: f64,
    amplitude: f64,
    kmax: usize,
    rng: &mut ChaCha8Rng,
) -> RealField {
    let d = grid.dims();
    let k = kmax as i64;
    let side = (2 * k + 1) as usize;
    let count = side.pow(d as u32);
    let mut terms = Vec::with_capacity(count);
    for idx in 0..count {
        let mut kv = [0i64; 3];
        let mut rest = idx;
        for item in kv.iter_mut().take(d) {
            *item = (rest % side) as i64 - k;
            rest /= side;
        }
        if kv.iter().all(|&c| c == 0) {
            continue;
        }
        let a: f64 = rng.gen_range(-1.0..1.0);
        let p: f64 = rng.gen_range(0.0..2.0 * PI);
        terms.push((kv, a, p));
    }
    let raw = RealField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(kv, a, p)| {
                let arg: f64 = (0..3).map(|i| kv[i] as f64 * x[i]).sum();
                a * (arg + p).cos()
            })
            .sum()
    });
    let avg = raw.sum() / raw.values().len() as f64;
    let centred = raw.map(|v| v - avg);
    let peak = centred.max_abs();
    let s = if peak > 0.0 { amplitude / peak } else { 0.0 };
    centred.map(|v| mean + s * v)
}

fn periodic_dist2(a: &[f64; 3], b: &[f64; 3], dims: usize) -> f64 {
    (0..dims)
        .map(|i| {
            let mut d = (a[i] - b[i]).abs() % (2.0 * PI);
            if d > PI {
                d = 2.0 * PI - d;
            }
            d * d
        })
        .sum()
}

fn markers(grid: &Grid, m: usize, seed: u64) -> Result<Vec<RealField>> {
    if m == 0 {
        return Err(Error::InvalidModel(
            "partition_markers needs at least one component".into(),
        ));
    }
    let d = grid.dims();
    // four quadrants for m = 4 in 2D, random seeds otherwise
    let seeds: Vec<[f64; 3]> = if m == 4 && d == 2 {
        let h = PI / 2.0;
        vec![[-h, -h, 0.0], [h, -h, 0.0], [-h, h, 0.0], [h, h, 0.0]]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| {
                let mut p = [0.0; 3];
                for c in p.iter_mut().take(d) {
                    *c = rng.gen_range(-PI..PI);
                }
                p
            })
            .collect()
    };
    let mut fields = vec![RealField::zeros(grid); m];
    for idx in 0..grid.len() {
        let x = grid.point(idx);
        let owner = (0..m)
            .min_by(|&i, &j| {
                periodic_dist2(&x, &seeds[i], d)
                    .partial_cmp(&periodic_dist2(&x, &seeds[j], d))
                    .expect("finite")
            })
            .expect("m > 0");
        fields[owner].values_mut()[idx] = (owner + 1) as f64;
    }
    for (j, f) in fields.iter_mut().enumerate() {
        let n2 = inner_unchecked(f, f);
        if n2 == 0.0 {
            return Err(Error::InvalidModel(format!(
                "partition marker {j} is empty on this grid; use a finer grid or another seed"
            )));
        }
        *f = f.scaled(1.0 / n2.sqrt());
    }
    Ok(fields)
}
