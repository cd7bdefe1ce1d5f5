use std::borrow::Cow;

use crate::correlation::{CorrelationKernel, KernelPath};
use crate::cost_model::{
    conventional_iteration_flops, fast_correlation_flops, CorrelationPath, IterationCost, OpCount,
};
use crate::sensing::SensingOperator;
use crate::solvers::CorrelationMode;
use crate::C64;

/// Produces `h_{t-1} = Φᴴ r_{t-1}` by whichever route the mode selects.
///
/// The fast route needs `h₀ = Φᴴy`, which is cached from the first
/// iteration, and the kernel, computed on first use unless supplied.
pub(crate) struct Correlator<'a> {
    op: &'a SensingOperator,
    mode: CorrelationMode,
    path: KernelPath,
    kernel: Option<Cow<'a, CorrelationKernel>>,
    kernel_precompute: Option<OpCount>,
    h0: Option<Vec<C64>>,
    scratch: Vec<C64>,
}

impl<'a> Correlator<'a> {
    pub fn new(
        op: &'a SensingOperator,
        mode: CorrelationMode,
        path: KernelPath,
        kernel: Option<&'a CorrelationKernel>,
    ) -> Self {
        Correlator {
            op,
            mode,
            path,
            kernel: kernel.map(Cow::Borrowed),
            kernel_precompute: None,
            h0: None,
            scratch: vec![C64::new(0.0, 0.0); op.n()],
        }
    }

    /// Transform cost of a kernel this correlator computed itself.
    pub fn kernel_precompute(&self) -> Option<OpCount> {
        self.kernel_precompute
    }

    fn choose(&self, t: usize, atoms: usize) -> CorrelationPath {
        match self.mode {
            CorrelationMode::Conventional => CorrelationPath::Conventional,
            CorrelationMode::Fast => CorrelationPath::Fast,
            CorrelationMode::Adaptive => {
                let kind = self.op.kind();
                let fast = fast_correlation_flops(kind, self.op.n(), t == 1, atoms);
                if fast <= conventional_iteration_flops(kind, self.op.n()) {
                    CorrelationPath::Fast
                } else {
                    CorrelationPath::Conventional
                }
            }
        }
    }

    /// Writes the correlation vector for iteration `t` into `out`.
    ///
    /// At `t = 1` the residual must be `y`. `support` and `coeffs` describe
    /// the current estimate, so that `residual = y − Φ_support·coeffs`.
    pub fn correlate(
        &mut self,
        t: usize,
        residual: &[C64],
        support: &[usize],
        coeffs: &[C64],
        out: &mut [C64],
    ) -> IterationCost {
        let kind = self.op.kind();
        let n = self.op.n();
        let conventional_flops = conventional_iteration_flops(kind, n);
        let path = self.choose(t, support.len());
        let mut counted = OpCount::default();
        let mut scaling = OpCount::default();

        let analytic_flops = match path {
            CorrelationPath::Conventional => {
                self.op.apply_adjoint_counted(residual, out, &mut counted, &mut scaling);
                if t == 1 && self.mode != CorrelationMode::Conventional {
                    self.h0 = Some(out.to_vec());
                }
                conventional_flops
            }
            CorrelationPath::Fast if t == 1 || self.h0.is_none() => {
                self.op.apply_adjoint_counted(residual, out, &mut counted, &mut scaling);
                self.h0 = Some(out.to_vec());
                conventional_flops
            }
            CorrelationPath::Fast => {
                if self.kernel.is_none() {
                    let kernel = CorrelationKernel::compute(self.op);
                    self.kernel_precompute = Some(kernel.precompute_ops());
                    self.kernel = Some(Cow::Owned(kernel));
                }
                let kernel = self.kernel.as_deref().expect("kernel present");
                let h0 = self.h0.as_deref().expect("h0 cached at t = 1");
                kernel
                    .fast_update_into(h0, support, coeffs, self.path, out, &mut self.scratch, &mut counted)
                    .expect("solver maintains a valid support");
                fast_correlation_flops(kind, n, false, support.len())
            }
        };

        IterationCost {
            t,
            path,
            analytic_flops,
            conventional_flops,
            counted,
            scaling,
            least_squares: OpCount::default(),
            identification: OpCount::default(),
        }
    }
}
