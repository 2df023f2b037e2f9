#pragma once

#include <string>

#include "samiqa/tensor.hpp"

namespace samiqa {

enum class DistanceMetric { Sub, L1, L2, Cos, Kld };

DistanceMetric parse_distance_metric(const std::string& name);
std::string distance_metric_name(DistanceMetric metric);

// All metrics take CxHxW feature maps. l1/l2/cos/kld reduce to a length-C
// vector; sub returns the flattened raw difference (length C*H*W).
Tensor dist_l1(const Tensor& a, const Tensor& b);
Tensor dist_sub(const Tensor& a, const Tensor& b);
Tensor dist_l2(const Tensor& a, const Tensor& b);
Tensor dist_cos(const Tensor& a, const Tensor& b);
Tensor dist_kld(const Tensor& a, const Tensor& b);

Tensor feature_distance(DistanceMetric metric, const Tensor& a, const Tensor& b);

// Length of the distance vector for a CxHxW input under the given metric.
std::size_t distance_width(DistanceMetric metric, std::size_t channels,
                           std::size_t spatial);

}  // namespace samiqa
