#include "omm/hjb.hpp"

namespace omm::hjb {

QuotePolicy::QuotePolicy(std::shared_ptr<const ValueFunction> vf, OptionBook book, TraderConfig trader)
    : vf_(std::move(vf)), book_(std::move(book)), trader_(trader) {
  if (!vf_) throw std::invalid_argument("quote policy needs a value function");
  book_.validate(trader_);
  if (std::abs(vf_->grid().vega.hi - trader_.vega_limit) > 1e-12 * trader_.vega_limit)
    throw std::invalid_argument("value function grid does not match the trader's vega limit");
}

bool QuotePolicy::admissible(std::size_t option, Side side, double portfolio_vega) const noexcept {
  return trade_admissible(portfolio_vega, book_[option].vega_step(), side, trader_.vega_limit);
}

double QuotePolicy::difference_quotient(std::size_t option, Side side, double t, double nu,
                                        double portfolio_vega) const {
  const auto& e = book_[option];
  const double target = portfolio_vega - psi(side) * e.vega_step();
  return (vf_->value_at(t, nu, portfolio_vega) - vf_->value_at(t, nu, target)) / e.size;
}

std::optional<double> QuotePolicy::quote(std::size_t option, Side side, double t, double nu,
                                         double portfolio_vega) const {
  if (!admissible(option, side, portfolio_vega)) return std::nullopt;
  const double p = difference_quotient(option, side, t, nu, portfolio_vega);
  return quoting::optimal_quote(book_[option].curve(side), p, trader_.delta_floor);
}

QuotePolicy quote_policy(std::shared_ptr<const ValueFunction> vf, const OptionBook& book,
                         const TraderConfig& trader) {
  return QuotePolicy(std::move(vf), book, trader);
}

}  // namespace omm::hjb
