/// Plane rotation `[c s; -s c]` zeroing the second component of `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Givens {
    pub c: f64,
    pub s: f64,
    pub r: f64,
}

impl Givens {
    pub fn new(a: f64, b: f64) -> Self {
        if b == 0.0 {
            return Self {
                c: 1.0,
                s: 0.0,
                r: a,
            };
        }
        let r = a.hypot(b);
        Self {
            c: a / r,
            s: b / r,
            r,
        }
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.c * x + self.s * y, -self.s * x + self.c * y)
    }
}
