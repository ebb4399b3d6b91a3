# symuniv/examples/demo.py
import os

from symuniv import RankinSelberg, Sym, SymPowerExperiment
from symuniv.modform import qexp_newform, sato_tate_statistics
from symuniv.sympower import local_factor


def ensure_output_dir(base_dir: str) -> str:
    """Create output directory with error handling."""
    try:
        output_dir = os.path.join(os.getcwd(), base_dir)
        os.makedirs(output_dir, exist_ok=True)
        print(f"Using output directory: {output_dir}")
        return output_dir
    except OSError as e:
        print(f"Error creating output directory: {e}")
        temp_dir = os.path.join(os.path.expanduser("~"), "temp_symuniv_output")
        os.makedirs(temp_dir, exist_ok=True)
        print(f"Falling back to temporary directory: {temp_dir}")
        return temp_dir


def demo_ramanujan_tau():
    """Demo of the exact expansion of Delta."""
    print("\n=== Demo 1: Ramanujan tau and Satake angles ===")

    f = qexp_newform(12, 20_000)
    print(f"tau(1..10): {[f.c(n) for n in range(1, 11)]}")
    print(f"lambda_f(2) = {f.lam(2):.12f}")
    stats = sato_tate_statistics(f, 20_000)
    print(f"Sato-Tate KS statistic over {stats['n_primes']} primes: {stats['ks_statistic']:.4f}")


def demo_local_factors():
    """Demo of local factors at p = 2."""
    print("\n=== Demo 2: Local factors at p = 2 ===")

    f = qexp_newform(12, 100)
    for kind in (Sym(2), RankinSelberg(1)):
        factor = local_factor(f, 2, kind)
        print(f"{kind}: degree {factor.degree}, root deviation {factor.max_root_deviation():.2e}")


def demo_prime_sums():
    """Demo of prime number theorem sums."""
    print("\n=== Demo 3: Prime sums for sym^2 ===")

    experiment = SymPowerExperiment(kind='sym2', n_coeffs=100_000)
    report = experiment.pnt(100_000, delta=0.5)
    print(f"theta(x)/x = {report['theta_ratio']:.4f}, psi(x)/x = {report['psi_ratio']:.4f}")
    print(f"P_delta ratio {report['pi_delta']['ratio']:.4f} "
          f">= {report['pi_delta']['lower_bound']:.4f}")


def demo_values():
    """Demo of L-values on a short vertical segment."""
    print("\n=== Demo 4: L(s, sym^2 f) along Re(s) = 0.85 ===")

    output_dir = ensure_output_dir("symuniv_output/values")
    experiment = SymPowerExperiment(kind='sym2', n_coeffs=20_000, n_jobs=2)
    results = experiment.process_points(
        [complex(0.85, t) for t in range(0, 20, 2)],
        output_csv=os.path.join(output_dir, "values.csv"))
    print(results)


def demo_universality():
    """Demo of a shift search against the constant target 1."""
    print("\n=== Demo 5: Shift search for sym^2 ===")

    output_dir = ensure_output_dir("symuniv_output/universality")
    experiment = SymPowerExperiment(kind='sym2', n_coeffs=20_000, n_jobs=2)
    result = experiment.universality(1.0, T=200.0, dt=0.05, eps=0.3)
    result.to_csv(os.path.join(output_dir, "sup_err.csv"))
    print(f"best t = {result.best_t:.2f}, sup error {result.best_err:.4f}, "
          f"good set fraction {result.good_set_measure:.4f}")


def main():
    """Run all demos."""
    try:
        demo_ramanujan_tau()
        demo_local_factors()
        demo_prime_sums()
        demo_values()
        demo_universality()
    except Exception as e:
        print(f"\nError running demo: {e}")
        print("Please check the coefficient cache and available memory.")


if __name__ == "__main__":
    main()
