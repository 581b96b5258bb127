#pragma once

namespace nldep {

// Standard normal density, distribution function and quantile.
// norm_quantile uses Wichura's AS241 (PPND16); absolute error is below 1e-15
// for p in [1e-300, 1 - 1e-16], far inside the 1e-9 budget.
double norm_pdf(double z);
double norm_cdf(double z);
double norm_quantile(double p);

}  // namespace nldep
