"""
Example usage of the risk set inference library.

Run from features/input-risk so the ``srsi`` package is importable.
"""

from pathlib import Path

from srsi import (
    AmbulanceConfig, EvaluationService, Mm1kConfig, RunConfig, SrsiProcedure, build_problem, reclassify,
)
from srsi.config import GP_CONFIG


def main():
    """Sequential run on a small M/M/1/k instance, compared with its oracle."""

    problem = build_problem('mm1k', Mm1kConfig(capacities=list(range(1, 11)), customers=500),
                            seed=7, sample_size=100)
    config = RunConfig(B=31, n0=40, r=10, replications=[10], alpha=0.2, delta=1.0,
                       budget=2000, seed=7)

    procedure = SrsiProcedure()
    result = procedure.run(config, problem)

    labels = problem.solution_labels()
    if result.success:
        print(f"✅ xhat = {labels[result.xhat]} after {result.iterations} iterations "
              f"({result.replications_used} replications)")
        print(f"Risk set: {{{', '.join(labels[m] for m in result.estimate.members)}}}")
        for warning in result.warnings:
            print(f"  - {warning}")
    else:
        print(f"❌ Run failed: {result.error}")
        return

    oracle = EvaluationService().oracle_for(result, problem)
    print(f"Oracle set: {{{', '.join(labels[m] for m in oracle.members)}}}")

    # One posterior answers every (alpha, delta) question
    print("\n" + "=" * 50)
    print("Reclassification")
    print("=" * 50)
    grid = reclassify(result.state, result.xhat, [0.1, 0.2, 0.3], [0.0, 1.0])
    for (alpha, delta), estimate in sorted(grid.items()):
        print(f"alpha={alpha:.2f} delta={delta:.1f}: {estimate.members}")


def example_with_custom_gp():
    """Jensen-Shannon kernel with a separate length scale per input source."""

    gp_config = dict(GP_CONFIG)
    gp_config.update({
        'divergence': 'jensen_shannon',
        'shared_lambda': False,
        'mle_restarts': 3,
        'refresh_interval': 200,
    })
    problem = build_problem('mm1k', Mm1kConfig(capacities=[1, 2, 3, 4, 5]), seed=3, sample_size=50)
    config = RunConfig(B=21, n0=20, r=5, replications=[5], budget=600, seed=3, variant='srsi-m')

    result = SrsiProcedure(gp_config, workers=2).run(config, problem)
    print(f"srsi-m: {result.estimate.members}, lambda = {result.state.params.lambda_}")


def example_refinement():
    """Reclassify a finished run over more candidate models without simulating again."""

    problem = build_problem('ambulance', AmbulanceConfig(), seed=1, sample_size=331)
    config = RunConfig(B=40, n0=36, r=2, replications=[2], alpha=0.1, delta=1.0,
                       budget=None, max_iterations=20, seed=1)

    procedure = SrsiProcedure(checkpoint_dir=Path("results/example"))
    result = procedure.run(config, problem)
    refined = procedure.refine(result, problem, count=200)
    print(f"B=40: {result.estimate.members}")
    print(f"refined over 200 models: {refined.members}")


if __name__ == "__main__":
    main()
    example_with_custom_gp()
    example_refinement()
