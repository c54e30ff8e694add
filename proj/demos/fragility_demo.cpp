// Small end-to-end run through the library: 400 synthetic motions on the
// reference frame, then MLE, linear-regression and kernel fragility curves.
#include <cstdio>
#include <span>

#include "fragility/app/stages.hpp"
#include "fragility/uq/bootstrap.hpp"

using namespace fragility;

int main() {
    app::RunConfig cfg;
    cfg.seed = 7;
    cfg.motions = 400;
    const auto set = app::synthesize_records(cfg, 0);
    std::printf("%zu records, %zu failed analyses\n", set.records.size(), set.failures.size());

    const auto data = project(set.records, im::ImKind::Sa);
    const auto grid = default_im_grid(data, 25);
    const double threshold = cfg.structure.yield_drift;

    const auto mle = param::fit_mle(data, threshold, im::ImKind::Sa);
    const auto lr = param::lr_to_fragility(param::fit_linear_demand(data), threshold, im::ImKind::Sa);
    std::printf("MLE: alpha = %.3f g, beta = %.3f\n", mle.curve.alpha, mle.curve.beta);
    std::printf("LR:  alpha = %.3f g, beta = %.3f\n", lr.alpha, lr.beta);

    const auto bw = nonparam::fragility_bandwidths(data);
    const auto kde = nonparam::kde_fragility(data, threshold, grid, bw.h_im, bw.H);
    std::printf("\n%10s %8s %8s\n", "Sa [g]", "MLE", "KDE");
    for (std::size_t i = 0; i < grid.size(); ++i)
        std::printf("%10.4f %8.3f %8.3f\n", grid[i], param::lognormal_eval(mle.curve, grid[i]),
                    kde.probability[i].value_or(-1.0));
    if (const auto m = uq::median_im(kde)) std::printf("\nKDE median Sa: %.3f g\n", *m);
    return 0;
}
