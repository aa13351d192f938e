//! Gray-code walk over all 2^N configurations with incremental energies.
//!
//! Step `k` flips site `trailing_zeros(k)`, so consecutive configurations
//! differ in one spin and every configuration is visited once. The walk
//! starts from all spins −1 (bits clear).

use crate::model::DenseForm;
use crate::observable::StateView;

/// Fields and energies are recomputed from scratch this often to stop
/// rounding drift from accumulating over long walks.
const RESYNC_INTERVAL: u64 = 1 << 14;

struct Tracked<'a> {
    form: &'a DenseForm,
    fields: Vec<f64>,
    energy: f64,
}

impl<'a> Tracked<'a> {
    fn new(form: &'a DenseForm, bits: u64) -> Self {
        let words = [bits];
        let fields = form.local_fields(&words);
        let energy = form.energy_from_fields(&words, &fields);
        Self { form, fields, energy }
    }

    fn resync(&mut self, bits: u64) {
        let words = [bits];
        self.fields = self.form.local_fields(&words);
        self.energy = self.form.energy_from_fields(&words, &self.fields);
    }

    #[inline(always)]
    fn flip(&mut self, i: usize, spin: f64) {
        self.energy += 2.0 * spin * self.fields[i];
        let c = -2.0 * spin;
        for (f, a) in self.fields.iter_mut().zip(self.form.row(i)) {
            *f += c * a;
        }
    }
}

/// Energy forms driving one enumeration.
pub(crate) struct WalkForms<'a> {
    pub total: &'a DenseForm,
    /// Extra components tracked into `StateView::parts[index]`.
    pub parts: Vec<(usize, &'a DenseForm)>,
    /// Vector defining the overlap (the first pattern), if any.
    pub overlap_vector: Option<&'a [f64]>,
}

fn overlap_raw(v: Option<&[f64]>, bits: u64) -> f64 {
    v.map_or(0.0, |v| {
        let terms: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(i, x)| if bits >> i & 1 == 1 { *x } else { -x })
            .collect();
        crate::stats::pairwise_sum(&terms)
    })
}

/// Visit every configuration of `n <= 63` sites in Gray-code order.
pub(crate) fn walk<F>(forms: &WalkForms<'_>, n: usize, mut visit: F)
where
    F: FnMut(&StateView<'_>),
{
    assert!((1..64).contains(&n), "Gray-code walk supports 1..=63 sites");
    let mut bits: u64 = 0;
    let mut total = Tracked::new(forms.total, bits);
    let mut parts: Vec<(usize, Tracked<'_>)> = forms.parts.iter().map(|(k, f)| (*k, Tracked::new(f, bits))).collect();
    let ov = forms.overlap_vector;
    let mut raw = overlap_raw(ov, bits);
    let mut magnetization = -(n as i64);
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();

    let mut emit = |bits: u64, total: &Tracked<'_>, parts: &[(usize, Tracked<'_>)], raw: f64, mag: i64| {
        let mut part_values = [0.0; 2];
        for (k, t) in parts {
            part_values[*k] = t.energy;
        }
        let words = [bits];
        visit(&StateView {
            words: &words,
            n,
            energy: total.energy,
            overlap_raw: raw,
            inv_sqrt_n,
            magnetization: mag,
            parts: part_values,
        });
    };

    emit(bits, &total, &parts, raw, magnetization);
    let count: u64 = 1 << n;
    for k in 1..count {
        let i = k.trailing_zeros() as usize;
        let spin = if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
        total.flip(i, spin);
        for (_, t) in parts.iter_mut() {
            t.flip(i, spin);
        }
        if let Some(v) = ov {
            raw -= 2.0 * spin * v[i];
        }
        magnetization -= 2 * spin as i64;
        bits ^= 1 << i;
        if k % RESYNC_INTERVAL == 0 {
            total.resync(bits);
            for (_, t) in parts.iter_mut() {
                t.resync(bits);
            }
            raw = overlap_raw(ov, bits);
        }
        emit(bits, &total, &parts, raw, magnetization);
    }
}
