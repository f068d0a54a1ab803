// Sampled ARMA representation of a CARMA(3,0) process at a few grid spacings,
// next to the small-spacing limit of its moving-average part.

#include <cstdio>

#include "carma_hf/carma_hf.hpp"

int main() {
  using namespace carma_hf;
  const CarmaModel model = validate({{6.0, 11.0, 6.0}, {1.0}, 1.0, "CARMA(3,0)"});

  for (double delta : {0.1, 0.01, 0.001}) {
    const SamplingGrid grid(delta);
    const SampledArma arma = sampled_arma(model, grid);
    std::printf("delta=%-6g theta=(%.6f, %.6f) tau2/delta^5=%.6f\n", delta, arma.theta[0], arma.theta[1],
                arma.tau2 / std::pow(delta, 5));
  }
  const AsymptoticMa limit = limit_ma_model(3);
  std::printf("limit        theta=(%.6f, %.6f) tau2/delta^5=%.6f\n", limit.theta_limit[0], limit.theta_limit[1],
              limit.tau2_scale);

  const SamplingGrid grid(0.01);
  for (int n = 0; n < model.p(); ++n)
    std::printf("gamma_MA(%d): exact %.6e  asymptotic %.6e\n", n, acvf_filtered(model, grid, n),
                gamma_ma_asymptotic(model, grid, n));
}
