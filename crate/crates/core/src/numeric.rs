//! Compensated summation and products.

/// How a product of factors in `[0,1]` is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProductMode {
    /// Plain left-to-right multiplication.
    Direct,
    /// Error-free transformation of each step (two-product with fused multiply-add).
    #[default]
    Compensated,
    /// Compensated sum of logarithms, exponentiated once.
    LogSum,
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a sequence.
pub fn sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Running product carrying a low-order correction term.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedProduct {
    hi: f64,
    lo: f64,
}

impl Default for CompensatedProduct {
    fn default() -> Self {
        Self { hi: 1.0, lo: 0.0 }
    }
}

impl CompensatedProduct {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mul(&mut self, f: f64) {
        let p = self.hi * f;
        let err = libm::fma(self.hi, f, -p);
        self.lo = libm::fma(self.lo, f, err);
        self.hi = p;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Accumulator for products of factors in `[0,1]` with a fixed [`ProductMode`].
///
/// A zero factor makes the product exactly zero and stays there.
#[derive(Debug, Clone, Copy)]
pub struct Product {
    mode: ProductMode,
    direct: f64,
    comp: CompensatedProduct,
    logs: NeumaierSum,
    zero: bool,
}

impl Product {
    pub fn new(mode: ProductMode) -> Self {
        Self {
            mode,
            direct: 1.0,
            comp: CompensatedProduct::new(),
            logs: NeumaierSum::new(),
            zero: false,
        }
    }

    pub fn mul(&mut self, f: f64) {
        if self.zero {
            return;
        }
        if f == 0.0 {
            self.zero = true;
            return;
        }
        match self.mode {
            ProductMode::Direct => self.direct *= f,
            ProductMode::Compensated => self.comp.mul(f),
            ProductMode::LogSum => self.logs.add(libm::log(f)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn value(&self) -> f64 {
        if self.zero {
            return 0.0;
        }
        match self.mode {
            ProductMode::Direct => self.direct,
            ProductMode::Compensated => self.comp.value(),
            ProductMode::LogSum => libm::exp(self.logs.value()),
        }
    }
}

/// Product of a sequence of factors.
pub fn product<I: IntoIterator<Item = f64>>(factors: I, mode: ProductMode) -> f64 {
    let mut p = Product::new(mode);
    for f in factors {
        p.mul(f);
        if p.is_zero() {
            break;
        }
    }
    p.value()
}

/// Reduce `x` to the centered representative `t ∈ [−½, ½)` of `x mod 1`.
///
/// The subtraction of the nearest integer is exact in binary floating point.
pub fn center(x: f64) -> f64 {
    let t = x - libm::round(x);
    if t >= 0.5 {
        t - 1.0
    } else {
        t
    }
}

/// Representative of `x mod 1` in `[0,1)`.
pub fn frac(x: f64) -> f64 {
    let t = center(x);
    if t < 0.0 {
        let u = t + 1.0;
        if u >= 1.0 {
            0.0
        } else {
            u
        }
    } else {
        t
    }
}
