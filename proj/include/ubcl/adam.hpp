// Copyright 2026 The UBCL Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UBCL_ADAM_HPP_
#define UBCL_ADAM_HPP_

#include <cmath>
#include <span>
#include <vector>

namespace ubcl {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
class Adam {
 public:
  explicit Adam(std::size_t n, AdamOptions opts = {})
      : opts_(opts), m_(n, Scalar(0)), v_(n, Scalar(0)) {}

  void step(std::span<Scalar> params, std::span<const Scalar> grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(opts_.beta1);
    const auto b2 = static_cast<Scalar>(opts_.beta2);
    const auto step_size = static_cast<Scalar>(lr / c1);
    const auto inv_c2 = static_cast<Scalar>(1.0 / c2);
    const auto eps = static_cast<Scalar>(opts_.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * grad[i];
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * grad[i] * grad[i];
      params[i] -= step_size * m_[i] / (std::sqrt(v_[i] * inv_c2) + eps);
    }
  }

  long steps() const { return t_; }

 private:
  AdamOptions opts_;
  std::vector<Scalar> m_;
  std::vector<Scalar> v_;
  long t_ = 0;
};

}  // namespace ubcl

#endif  // UBCL_ADAM_HPP_
