#pragma once

#include <span>

namespace cfpp::stats {

double mean(std::span<const double> v);

// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> v);

// Mean absolute deviation about the mean (n denominator).
double mean_abs_dev(std::span<const double> v);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (Lentz), accurate to ~1e-15 for the df range used here.
double regularized_incomplete_beta(double a, double b, double x);

// Two-tailed p-value for Student's t statistic with df degrees of freedom.
double student_t_two_tailed_p(double t, int df);

}  // namespace cfpp::stats
