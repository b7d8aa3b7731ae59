/*******************************************************************************
* Copyright 2026 The LCN Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#ifndef LCN_DOUBLE_DOUBLE_HPP
#define LCN_DOUBLE_DOUBLE_HPP

#include <cmath>

namespace lcn {

// Unevaluated sum hi + lo with |lo| <= ulp(hi) / 2. Only what the window
// statistics need; relies on strict IEEE evaluation (no -ffast-math).
struct DoubleDouble {
    double hi = 0.0, lo = 0.0;

    double value() const { return hi + lo; }
};

// a + b == sum + err exactly.
inline void two_sum(double a, double b, double &sum, double &err) {
    sum = a + b;
    const double bv = sum - a;
    err = (a - (sum - bv)) + (b - bv);
}

inline DoubleDouble dd_normalize(double s, double e) {
    const double hi = s + e;
    return {hi, e - (hi - s)};
}

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
    double s, e;
    two_sum(a.hi, b.hi, s, e);
    return dd_normalize(s, e + a.lo + b.lo);
}

inline DoubleDouble operator-(DoubleDouble a) {
    return {-a.hi, -a.lo};
}

inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) {
    return a + (-b);
}

inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
    const double p = a.hi * b.hi;
    const double e = std::fma(a.hi, b.hi, -p);
    return dd_normalize(p, e + a.hi * b.lo + a.lo * b.hi);
}

inline DoubleDouble operator/(DoubleDouble a, double d) {
    const double q1 = a.hi / d;
    const double p = q1 * d;
    const double pe = std::fma(q1, d, -p);
    const double q2 = ((a.hi - p) - pe + a.lo) / d;
    return dd_normalize(q1, q2);
}

} // namespace lcn

#endif
