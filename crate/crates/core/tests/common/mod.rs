#![allow(dead_code)]

use std::f64::consts::PI;

use porohom::cell::HomogenizedCoefficients;
use porohom::geometry::Mesh;
use porohom::problem::ProblemData;
use porohom::Point;

/// `u*(x, t) = sin(pi x) sin(pi y) exp(-t)` for the homogenized equation
/// with obstacle source `g = 0`.
pub struct Manufactured {
    pub c: HomogenizedCoefficients,
    pub kappa: f64,
}

impl Manufactured {
    pub fn u(&self, p: Point, t: f64) -> f64 {
        (PI * p[0]).sin() * (PI * p[1]).sin() * (-t).exp()
    }

    /// Volume source `f` with `theta f` equal to the left-hand side applied
    /// to `u*`:
    /// `theta f = (-(theta + sigma) + pi^2 (q11 + q22) + theta kappa) u*
    ///            - 2 q12 pi^2 cos(pi x) cos(pi y) exp(-t)`.
    pub fn f(&self, p: Point, t: f64) -> f64 {
        let HomogenizedCoefficients { q, theta, sigma } = self.c;
        let pi2 = PI * PI;
        let u = self.u(p, t);
        let cc = (PI * p[0]).cos() * (PI * p[1]).cos() * (-t).exp();
        ((-(theta + sigma) + pi2 * (q[0][0] + q[1][1]) + theta * self.kappa) * u
            - 2.0 * q[0][1] * pi2 * cc)
            / theta
    }

    /// Residual of the strong equation by central differences of `u*`.
    pub fn fd_residual(&self, p: Point, t: f64, h: f64) -> f64 {
        let HomogenizedCoefficients { q, theta, sigma } = self.c;
        let u = |dx: f64, dy: f64, dt: f64| self.u([p[0] + dx, p[1] + dy], t + dt);
        let ut = (u(0.0, 0.0, h) - u(0.0, 0.0, -h)) / (2.0 * h);
        let uxx = (u(h, 0.0, 0.0) - 2.0 * u(0.0, 0.0, 0.0) + u(-h, 0.0, 0.0)) / (h * h);
        let uyy = (u(0.0, h, 0.0) - 2.0 * u(0.0, 0.0, 0.0) + u(0.0, -h, 0.0)) / (h * h);
        let uxy = (u(h, h, 0.0) - u(h, -h, 0.0) - u(-h, h, 0.0) + u(-h, -h, 0.0)) / (4.0 * h * h);
        let div = q[0][0] * uxx + (q[0][1] + q[1][0]) * uxy + q[1][1] * uyy;
        (theta + sigma) * ut - div + theta * self.kappa * u(0.0, 0.0, 0.0) - theta * self.f(p, t)
    }

    pub fn data(&self, final_time: f64) -> ProblemData {
        let me = Manufactured {
            c: self.c,
            kappa: self.kappa,
        };
        let init = Manufactured {
            c: self.c,
            kappa: self.kappa,
        };
        ProblemData::new(self.kappa, final_time)
            .unwrap()
            .with_source(move |p, t| me.f(p, t))
            .with_initial(move |p| init.u(p, 0.0))
    }
}

/// Degree-5 Dunavant rule on the reference triangle: (weight, l1, l2, l3).
const DUNAVANT7: [(f64, [f64; 3]); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506;
    const W2: f64 = 0.125_939_180_544_827;
    [
        (W0, [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
        (W1, [A1, B1, B1]),
        (W1, [B1, A1, B1]),
        (W1, [B1, B1, A1]),
        (W2, [A2, B2, B2]),
        (W2, [B2, A2, B2]),
        (W2, [B2, B2, A2]),
    ]
};

/// `|| u_h - u ||_{L2}` with a degree-5 rule per triangle.
pub fn l2_error_exact(mesh: &Mesh, values: &[f64], exact: impl Fn(Point) -> f64) -> f64 {
    let mut s = 0.0;
    for (k, t) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = mesh.triangle_points(k);
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
        for (w, l) in DUNAVANT7 {
            let p = [
                l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
                l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
            ];
            let uh = l[0] * values[t[0]] + l[1] * values[t[1]] + l[2] * values[t[2]];
            s += w * area * (uh - exact(p)).powi(2);
        }
    }
    s.sqrt()
}

pub fn anisotropic() -> HomogenizedCoefficients {
    HomogenizedCoefficients {
        q: [[0.62, 0.08], [0.08, 0.51]],
        theta: 0.8,
        sigma: 1.6,
    }
}
