use std::time::{Duration, Instant};

/// Shortest timed run; cheap steppers repeat until it has passed.
const MIN_RUN: Duration = Duration::from_millis(200);

/// Wall-clock cost of one step at a given system size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub n: usize,
    pub seconds_per_step: f64,
}

/// Time at least `steps` calls of the stepper built by `setup(n)` for each
/// size, after one warm-up call, keeping the median of `repeats` runs. Each
/// run continues past `steps` until it has lasted 200 ms. Sizes are timed in
/// interleaved rounds so that slow or fast periods of the machine hit all of them.
pub fn scaling_benchmark<S, F>(sizes: &[usize], steps: usize, repeats: usize, mut setup: S) -> Vec<ScalingPoint>
where
    S: FnMut(usize) -> F,
    F: FnMut(),
{
    let mut steppers: Vec<F> = sizes.iter().map(|&n| setup(n)).collect();
    steppers.iter_mut().for_each(|step| step());
    let mut times = vec![Vec::new(); sizes.len()];
    for _ in 0..repeats.max(1) {
        for (step, times) in steppers.iter_mut().zip(times.iter_mut()) {
            let start = Instant::now();
            let mut done = 0;
            while done < steps.max(1) || start.elapsed() < MIN_RUN {
                step();
                done += 1;
            }
            times.push(start.elapsed().as_secs_f64() / done as f64);
        }
    }
    sizes
        .iter()
        .zip(times)
        .map(|(&n, mut t)| {
            t.sort_by(f64::total_cmp);
            ScalingPoint {
                n,
                seconds_per_step: t[t.len() / 2],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_every_size() {
        let mut calls = 0;
        let pts = scaling_benchmark(&[10, 20], 3, 2, |n| {
            calls += 1;
            move || {
                std::hint::black_box((0..n).sum::<usize>());
            }
        });
        assert_eq!(calls, 2);
        assert_eq!(pts.iter().map(|p| p.n).collect::<Vec<_>>(), vec![10, 20]);
        assert!(pts.iter().all(|p| p.seconds_per_step >= 0.0));
    }

    #[test]
    fn cheap_steppers_run_for_the_minimum_time() {
        let count = std::cell::Cell::new(0usize);
        let pts = scaling_benchmark(&[1], 1, 1, |_| || count.set(count.get() + 1));
        assert!(count.get() > 1000, "{} calls", count.get());
        assert!(pts[0].seconds_per_step < 1e-3);
    }
}
