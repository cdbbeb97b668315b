use std::fmt;
use std::str::FromStr;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Daxpy,
    Dot,
    Spmv,
}

impl KernelKind {
    pub fn default_block(self) -> usize {
        match self {
            KernelKind::Daxpy | KernelKind::Spmv => 256,
            KernelKind::Dot => 128,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Daxpy => "daxpy",
            KernelKind::Dot => "dot",
            KernelKind::Spmv => "spmv",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "daxpy" => Ok(KernelKind::Daxpy),
            "dot" => Ok(KernelKind::Dot),
            "spmv" => Ok(KernelKind::Spmv),
            other => Err(CliError::Config(format!(
                "unknown kernel `{other}` (expected daxpy, dot or spmv)"
            ))),
        }
    }
}

pub const DEFAULT_WARP: usize = 8;

/// Launch geometry of one accelerator kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridificationPlan {
    pub kind: KernelKind,
    pub numb_rows: usize,
    pub numb_th_block: usize,
    pub n_th_warp: usize,
    pub n_blocks: usize,
    pub n_threads_per_block: usize,
}

impl fmt::Display for GridificationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kind={} rows={} warp={} nBlocks={} nThreadsPerBlock={}",
            self.kind, self.numb_rows, self.n_th_warp, self.n_blocks, self.n_threads_per_block
        )
    }
}

/// Blocks needed to cover every row: `(rows + block - 1) / block` for the
/// vector kernels, and `(rows * warp + block - 1) / block` for SpMV, which
/// assigns a warp-slice of threads to each row.
pub fn gridify(
    kind: KernelKind,
    numb_rows: usize,
    numb_th_block: Option<usize>,
    n_th_warp: Option<usize>,
) -> Result<GridificationPlan, CliError> {
    let block = numb_th_block.unwrap_or(kind.default_block());
    let warp = n_th_warp.unwrap_or(DEFAULT_WARP);
    if numb_rows == 0 || block == 0 || warp == 0 {
        return Err(CliError::Config(
            "rows, block size and warp size must be positive".into(),
        ));
    }
    let work = match kind {
        KernelKind::Daxpy | KernelKind::Dot => Some(numb_rows),
        KernelKind::Spmv => numb_rows.checked_mul(warp),
    };
    let n_blocks = work
        .and_then(|w| w.checked_add(block - 1))
        .map(|w| w / block)
        .ok_or_else(|| CliError::Config("launch size overflows".into()))?;
    Ok(GridificationPlan {
        kind,
        numb_rows,
        numb_th_block: block,
        n_th_warp: warp,
        n_blocks,
        n_threads_per_block: block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults() {
        assert_eq!(gridify(KernelKind::Dot, 1000, None, None).unwrap().n_threads_per_block, 128);
        let p = gridify(KernelKind::Daxpy, 1000, None, None).unwrap();
        assert_eq!((p.n_blocks, p.n_threads_per_block), (4, 256));
        assert_eq!(gridify(KernelKind::Spmv, 1000, None, None).unwrap().n_blocks, 32);
    }

    #[test]
    fn rejects_zero() {
        assert!(gridify(KernelKind::Daxpy, 0, None, None).is_err());
        assert!(gridify(KernelKind::Spmv, 10, Some(0), None).is_err());
        assert!(gridify(KernelKind::Spmv, 10, None, Some(0)).is_err());
        assert!(gridify(KernelKind::Spmv, usize::MAX, None, None).is_err());
    }

    #[test]
    fn kind_parsing() {
        for k in [KernelKind::Daxpy, KernelKind::Dot, KernelKind::Spmv] {
            assert_eq!(k.name().parse::<KernelKind>().unwrap(), k);
        }
        assert!("axpy".parse::<KernelKind>().is_err());
    }

    proptest! {
        #[test]
        fn blocks_cover_all_rows(rows in 1usize..10_000_000, block in 1usize..2048, warp in 1usize..64) {
            let d = gridify(KernelKind::Daxpy, rows, Some(block), None).unwrap();
            prop_assert!(d.n_blocks * block >= rows);
            prop_assert!((d.n_blocks - 1) * block < rows);
            let s = gridify(KernelKind::Spmv, rows, Some(block), Some(warp)).unwrap();
            prop_assert!(s.n_blocks * block >= rows * warp);
            prop_assert!((s.n_blocks - 1) * block < rows * warp);
        }
    }
}
