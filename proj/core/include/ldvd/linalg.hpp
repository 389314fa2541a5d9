/* Copyright (c) 2026 The LDVD Lab Authors. All Rights Reserved.
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at
   http://www.apache.org/licenses/LICENSE-2.0
   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#pragma once

#include <vector>

#include "ldvd/rng.hpp"
#include "ldvd/tensor.hpp"

namespace ldvd {

struct EighResult {
  std::vector<double> eigenvalues;  // ascending
  Tensor eigenvectors;              // (n, n), column j pairs with eigenvalue j
};

/// Cyclic Jacobi rotations for a symmetric matrix. Input is symmetrized
/// before sweeping; suitable for the modest dimensions used here.
EighResult jacobi_eigh(const Tensor& a);

/// Eigenvalues of a symmetric tridiagonal matrix (diag, offdiag) via
/// implicit-shift QL. Returned ascending.
std::vector<double> tridiag_eigenvalues(std::vector<double> diag, std::vector<double> offdiag);

/// Largest-singular-value estimate by alternating power iteration.
double power_iteration_sigma(const Tensor& w, int iters, Rng& rng);

Tensor matmul_dense(const Tensor& a, const Tensor& b);
Tensor transpose_dense(const Tensor& a);

}  // namespace ldvd
