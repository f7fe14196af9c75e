#pragma once

namespace omfbm {

double gamma_fn(double x);
double log_gamma(double x);
double beta(double a, double b);

// F(a,b;c;x) through the Euler integral, c > b > 0, x < 1.
double gauss_2f1(double a, double b, double c, double x);

/// Hurst parameter and the normalizing constants of the Volterra kernel.
struct HurstConfig {
    double H = 0.0;
    double c_H = 0.0;
    double B_H = 0.0;
    double A_H = 0.0;
};

HurstConfig hurst_config(double H);

}  // namespace omfbm
