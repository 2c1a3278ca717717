#pragma once

#include "gsq/config.hpp"
#include "gsq/rng.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsq {

enum class EventKind : std::uint8_t {
    // Tie-break rank at equal event times: completions free capacity before
    // new demand is placed.
    ServiceCompletion = 0,
    Abandonment = 1,
    Arrival = 2,
};

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::ServiceCompletion: return "completion";
        case EventKind::Abandonment: return "abandonment";
        case EventKind::Arrival: return "arrival";
    }
    return "?";
}

struct SimOptions {
    double horizon = 1e4;
    double warmup = 1e3;
    std::uint64_t seed = 1;
    bool collect_trajectory = false;
    bool audit = false;  // per-event invariant audit; tests only, slow
    // First-passage mode: stop as soon as cumulative power reaches this value
    // and record the exact crossing time.
    std::optional<double> stop_at_power;
};

struct TrajectoryPoint {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    int group = -1;  // -1: buffer entry, lost arrival or abandonment
    int system_count = 0;
    int buffer_count = 0;
    double power_rate = 0.0;
};

/// One seeded run. Time averages and per-customer tallies cover the window
/// [warmup, horizon); the lifetime counters cover the whole run and satisfy
/// arrivals == completions + losses + abandonments + in_system_at_end exactly.
struct RunStats {
    double horizon = 0.0;
    double warmup = 0.0;
    std::uint64_t seed = 0;

    std::uint64_t arrivals = 0;
    std::uint64_t completions = 0;
    std::uint64_t losses = 0;
    std::uint64_t abandonments = 0;
    std::uint64_t in_system_at_end = 0;

    std::vector<double> group_count_avg;
    double system_count_avg = 0.0;
    double buffer_count_avg = 0.0;
    double held_count_avg = 0.0;  // customers parked at sleeping servers
    double power_rate_avg = 0.0;

    std::uint64_t window_arrivals = 0;
    std::uint64_t window_losses = 0;
    std::uint64_t window_abandonments = 0;
    std::uint64_t window_completions = 0;
    double window_sojourn_sum = 0.0;          // completed customers
    double window_virtual_service_sum = 0.0;  // completed customers
    double window_departed_sojourn_sum = 0.0;  // completed + abandoned
    std::uint64_t window_departures = 0;

    double cumulative_power = 0.0;  // Phi at end of run, from time 0
    double initial_power_rate = 0.0;
    double end_time = 0.0;  // horizon, or the first-passage crossing time
    bool trajectory_collected = false;
    std::optional<double> first_passage_time;
    std::vector<TrajectoryPoint> trajectory;

    double loss_probability() const {
        return window_arrivals == 0 ? 0.0
                                    : static_cast<double>(window_losses) / window_arrivals;
    }
    double abandonment_fraction() const {
        return window_arrivals == 0
                   ? 0.0
                   : static_cast<double>(window_abandonments) / window_arrivals;
    }
    double mean_sojourn() const {
        return window_completions == 0 ? 0.0 : window_sojourn_sum / window_completions;
    }
    double mean_virtual_service() const {
        return window_completions == 0 ? 0.0
                                       : window_virtual_service_sum / window_completions;
    }
    double mean_departed_sojourn() const {
        return window_departures == 0 ? 0.0
                                      : window_departed_sojourn_sum / window_departures;
    }
    double departure_rate() const {
        const double span = horizon - warmup;
        return span > 0.0 ? static_cast<double>(window_departures) / span : 0.0;
    }
};

class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Customer {
    std::uint64_t arrival_seq = 0;
    double arrival_time = 0.0;
    double patience_budget = kInf;  // total waiting allowed before abandoning
    double waited = 0.0;            // waiting consumed so far
    double buffer_entered = 0.0;
    double service_started = 0.0;
    double service_total = 0.0;  // accumulated in-service time, all attempts
    double requirement = 0.0;    // sampled total service-time requirement
    double accrued = 0.0;        // progress toward requirement (Resume)
    bool has_requirement = false;
    int group = -1;
    enum class Where : std::uint8_t { Free, InService, Held, InBuffer } where = Where::Free;
    std::uint32_t epoch = 0;  // bumped on every transition; stale events skip
};

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    std::uint64_t seq = 0;  // scheduling order, final tie-break
    std::uint32_t slot = 0;
    std::uint32_t epoch = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

struct GroupState {
    bool working = false;
    std::vector<std::uint32_t> occupants;  // customer slots, insertion order
};

class Simulator {
public:
    Simulator(const SystemConfig& config, const SimOptions& opt)
        : config_(config),
          opt_(opt),
          arrival_rng_(make_substream(opt.seed, 0)),
          patience_rng_(make_substream(opt.seed, 1)) {
        const ValidationResult v = validate(config);
        if (!v.ok())
            throw SimulationError("invalid configuration: " + v.violations.front());
        if (!(opt.horizon > opt.warmup) || !(opt.warmup >= 0.0))
            throw SimulationError("require horizon > warmup >= 0");
        const std::size_t n = config.groups.size();
        service_rng_.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            service_rng_.push_back(make_substream(opt.seed, 2 + j));
        groups_.resize(n);
        groups_[0].working = true;  // base-line group is always work-on
        is_buffer_model_ = config.buffer.kind == BufferKind::InfiniteWithImpatience;
        theta_ = config.buffer.theta;
        stats_.horizon = opt.horizon;
        stats_.warmup = opt.warmup;
        stats_.seed = opt.seed;
        stats_.group_count_avg.assign(n, 0.0);
        group_integral_.assign(n, 0.0);
        power_rate_ = current_power_rate();
        stats_.initial_power_rate = power_rate_;
        stats_.trajectory_collected = opt.collect_trajectory;
    }

    RunStats run() {
        schedule_arrival();
        while (true) {
            const Event ev = pop_event();
            if (ev.time >= opt_.horizon) {
                advance_to(opt_.horizon);
                break;
            }
            advance_to(ev.time);
            if (stopped_) break;
            dispatch(ev);
            if (opt_.audit) audit();
            if (stopped_) break;
        }
        finalize();
        return std::move(stats_);
    }

private:
    // -- clock and integrals ------------------------------------------------

    double current_power_rate() const {
        double rate = 0.0;
        for (std::size_t j = 0; j < groups_.size(); ++j) {
            const auto& g = config_.groups[j];
            rate += g.size * (groups_[j].working ? g.power_work : g.power_sleep);
        }
        return rate;
    }

    void advance_to(double t) {
        const double dt = t - now_;
        if (dt <= 0.0) {
            now_ = t;
            return;
        }
        // first-passage check uses the lifetime power integral
        if (opt_.stop_at_power && !stats_.first_passage_time) {
            const double target = *opt_.stop_at_power;
            if (phi_ + power_rate_ * dt >= target) {
                if (!(power_rate_ > 0.0))
                    throw SimulationError("power rate is zero; first passage unreachable");
                const double t_cross = now_ + (target - phi_) / power_rate_;
                integrate_window(now_, t_cross);
                phi_ += power_rate_ * (t_cross - now_);
                now_ = t_cross;
                stats_.first_passage_time = t_cross;
                stopped_ = true;
                return;
            }
        }
        integrate_window(now_, t);
        phi_ += power_rate_ * dt;
        now_ = t;
    }

    void integrate_window(double a, double b) {
        const double lo = std::max(a, opt_.warmup);
        const double hi = std::min(b, opt_.horizon);
        if (hi <= lo) return;
        const double dt = hi - lo;
        int system = 0;
        int held = 0;
        for (std::size_t j = 0; j < groups_.size(); ++j) {
            const int occ = static_cast<int>(groups_[j].occupants.size());
            group_integral_[j] += occ * dt;
            system += occ;
            if (!groups_[j].working) held += occ;
        }
        system_integral_ += (system + static_cast<int>(buffer_.size())) * dt;
        buffer_integral_ += static_cast<double>(buffer_.size()) * dt;
        held_integral_ += held * dt;
        power_integral_ += power_rate_ * dt;
    }

    bool in_window(double t) const { return t >= opt_.warmup && t < opt_.horizon; }

    // -- event plumbing -----------------------------------------------------

    Event pop_event() {
        while (true) {
            if (events_.empty())
                throw SimulationError("event list exhausted before horizon");
            Event ev = events_.top();
            if (ev.kind == EventKind::Arrival) return ev;
            // completions/abandonments may be stale (lazy cancellation)
            if (customers_[ev.slot].epoch == ev.epoch) return ev;
            events_.pop();
        }
    }

    void push_event(double time, EventKind kind, std::uint32_t slot, std::uint32_t epoch) {
        events_.push(Event{time, kind, event_seq_++, slot, epoch});
    }

    void dispatch(const Event& ev) {
        events_.pop();
        switch (ev.kind) {
            case EventKind::Arrival: on_arrival(); break;
            case EventKind::ServiceCompletion: on_completion(ev.slot); break;
            case EventKind::Abandonment: on_abandonment(ev.slot); break;
        }
    }

    void record(EventKind kind, int group) {
        if (!opt_.collect_trajectory) return;
        int system = static_cast<int>(buffer_.size());
        for (const auto& g : groups_) system += static_cast<int>(g.occupants.size());
        stats_.trajectory.push_back(TrajectoryPoint{now_, kind, group, system,
                                                    static_cast<int>(buffer_.size()),
                                                    power_rate_});
    }

    // -- customer pool ------------------------------------------------------

    std::uint32_t new_customer() {
        std::uint32_t slot;
        if (!free_slots_.empty()) {
            slot = free_slots_.back();
            free_slots_.pop_back();
        } else {
            slot = static_cast<std::uint32_t>(customers_.size());
            customers_.emplace_back();
        }
        Customer& c = customers_[slot];
        const std::uint32_t keep_epoch = c.epoch + 1;
        c = Customer{};
        c.epoch = keep_epoch;
        c.arrival_seq = stats_.arrivals;
        c.arrival_time = now_;
        if (is_buffer_model_ && theta_ > 0.0)
            c.patience_budget = -std::log(patience_rng_.uniform01()) / theta_;
        return slot;
    }

    void release_customer(std::uint32_t slot) {
        Customer& c = customers_[slot];
        c.epoch += 1;
        c.where = Customer::Where::Free;
        free_slots_.push_back(slot);
    }

    // -- service lifecycle --------------------------------------------------

    void start_service(std::uint32_t slot, int group) {
        Customer& c = customers_[slot];
        if (c.where == Customer::Where::InBuffer) c.waited += now_ - c.buffer_entered;
        c.epoch += 1;
        c.where = Customer::Where::InService;
        c.group = group;
        c.service_started = now_;
        double remaining;
        if (config_.residual == ResidualPolicy::Resume) {
            if (!c.has_requirement) {
                c.requirement = config_.groups[group].service.sample(service_rng_[group]);
                c.has_requirement = true;
                c.accrued = 0.0;
            }
            remaining = c.requirement - c.accrued;
        } else {
            c.requirement = config_.groups[group].service.sample(service_rng_[group]);
            remaining = c.requirement;
        }
        groups_[group].occupants.push_back(slot);
        push_event(now_ + remaining, EventKind::ServiceCompletion, slot, c.epoch);
    }

    /// Service interrupted because the whole group goes to sleep. The pending
    /// completion is invalidated by the epoch bump; the occupant list is
    /// managed by the caller.
    void interrupt_service(std::uint32_t slot) {
        Customer& c = customers_[slot];
        c.epoch += 1;
        const double episode = now_ - c.service_started;
        c.service_total += episode;
        if (config_.residual == ResidualPolicy::Resume) {
            c.accrued += episode;
        } else {
            c.has_requirement = false;
            c.accrued = 0.0;
        }
    }

    void hold_at_group(std::uint32_t slot, int group) {
        Customer& c = customers_[slot];
        c.epoch += 1;
        c.where = Customer::Where::Held;
        c.group = group;
        groups_[group].occupants.push_back(slot);
    }

    void enter_buffer_back(std::uint32_t slot) {
        Customer& c = customers_[slot];
        c.epoch += 1;
        c.where = Customer::Where::InBuffer;
        c.group = -1;
        c.buffer_entered = now_;
        buffer_.push_back(slot);
        schedule_abandonment(slot);
    }

    void enter_buffer_front(std::uint32_t slot) {
        Customer& c = customers_[slot];
        c.epoch += 1;
        c.where = Customer::Where::InBuffer;
        c.group = -1;
        c.buffer_entered = now_;
        buffer_.push_front(slot);
        schedule_abandonment(slot);
    }

    void schedule_abandonment(std::uint32_t slot) {
        if (theta_ <= 0.0) return;
        Customer& c = customers_[slot];
        const double remaining = c.patience_budget - c.waited;
        push_event(now_ + remaining, EventKind::Abandonment, slot, c.epoch);
    }

    // -- arrivals -----------------------------------------------------------

    void schedule_arrival() {
        const double gap = config_.arrival.sample(arrival_rng_);
        push_event(now_ + gap, EventKind::Arrival, 0, 0);
    }

    void on_arrival() {
        schedule_arrival();
        stats_.arrivals += 1;
        if (in_window(now_)) stats_.window_arrivals += 1;

        if (is_buffer_model_) {
            const std::uint32_t slot = new_customer();
            enter_buffer_back(slot);
            settle_buffer();
            record(EventKind::Arrival, customers_[slot].group);
            return;
        }

        // Loss model: leftmost group with a free server; a sleeping group
        // parks the customer at an idle sleep server without service.
        int target = -1;
        for (std::size_t j = 0; j < groups_.size(); ++j) {
            if (static_cast<int>(groups_[j].occupants.size()) < config_.groups[j].size) {
                target = static_cast<int>(j);
                break;
            }
        }
        if (target < 0) {
            stats_.losses += 1;
            if (in_window(now_)) stats_.window_losses += 1;
            record(EventKind::Arrival, -1);
            return;
        }
        const std::uint32_t slot = new_customer();
        if (groups_[target].working) {
            start_service(slot, target);
        } else {
            hold_at_group(slot, target);
        }
        settle_loss();
        record(EventKind::Arrival, customers_[slot].group);
    }

    // -- departures ---------------------------------------------------------

    void remove_occupant(int group, std::uint32_t slot) {
        auto& occ = groups_[group].occupants;
        occ.erase(std::find(occ.begin(), occ.end(), slot));
    }

    void on_completion(std::uint32_t slot) {
        Customer& c = customers_[slot];
        c.service_total += now_ - c.service_started;
        remove_occupant(c.group, slot);
        stats_.completions += 1;
        if (in_window(now_)) {
            stats_.window_completions += 1;
            stats_.window_sojourn_sum += now_ - c.arrival_time;
            stats_.window_virtual_service_sum += c.service_total;
            stats_.window_departures += 1;
            stats_.window_departed_sojourn_sum += now_ - c.arrival_time;
        }
        const int group = c.group;
        release_customer(slot);
        if (is_buffer_model_) settle_buffer(); else settle_loss();
        record(EventKind::ServiceCompletion, group);
    }

    void on_abandonment(std::uint32_t slot) {
        Customer& c = customers_[slot];
        buffer_.erase(std::find(buffer_.begin(), buffer_.end(), slot));
        stats_.abandonments += 1;
        if (in_window(now_)) {
            stats_.window_abandonments += 1;
            stats_.window_departures += 1;
            stats_.window_departed_sojourn_sum += now_ - c.arrival_time;
        }
        release_customer(slot);
        settle_buffer();
        record(EventKind::Abandonment, -1);
    }

    // -- threshold dynamics, loss model --------------------------------------

    /// Runs sleep, concentrative-transfer and wake passes to a fixed point.
    /// Pass order prevents a group from waking and sleeping within one event.
    void settle_loss() {
        bool changed = true;
        while (changed) {
            changed = false;

            // sleep: a working non-base group with fewer in-service customers
            // than L (or none at all) powers down; occupants become holders
            for (std::size_t j = 1; j < groups_.size(); ++j) {
                auto& g = groups_[j];
                const int occ = static_cast<int>(g.occupants.size());
                if (g.working &&
                    (occ < config_.groups[j].thresholds.sleep_below || occ == 0)) {
                    for (std::uint32_t slot : g.occupants) {
                        interrupt_service(slot);
                        customers_[slot].where = Customer::Where::Held;
                    }
                    g.working = false;
                    changed = true;
                }
            }

            // concentrative transfer: holders of the rightmost sleeping group
            // move into free servers of the leftmost group with capacity
            while (true) {
                int src = -1;
                for (int j = static_cast<int>(groups_.size()) - 1; j >= 1; --j) {
                    if (!groups_[j].working && !groups_[j].occupants.empty()) {
                        src = j;
                        break;
                    }
                }
                if (src < 0) break;
                int dst = -1;
                for (int j = 0; j < src; ++j) {
                    if (static_cast<int>(groups_[j].occupants.size()) < config_.groups[j].size) {
                        dst = j;
                        break;
                    }
                }
                if (dst < 0) break;
                const int capacity = config_.groups[dst].size -
                                     static_cast<int>(groups_[dst].occupants.size());
                std::vector<std::uint32_t> movers(groups_[src].occupants.begin(),
                                                  groups_[src].occupants.end());
                std::sort(movers.begin(), movers.end(),
                          [&](std::uint32_t a, std::uint32_t b) {
                              return customers_[a].arrival_seq < customers_[b].arrival_seq;
                          });
                const int count = std::min<int>(capacity, static_cast<int>(movers.size()));
                for (int k = 0; k < count; ++k) {
                    const std::uint32_t slot = movers[k];
                    remove_occupant(src, slot);
                    if (groups_[dst].working) {
                        start_service(slot, dst);
                    } else {
                        hold_at_group(slot, dst);
                    }
                }
                changed = true;
            }

            // wake: a sleeping group whose holder count reached K starts all
            // of them at once
            for (std::size_t j = 1; j < groups_.size(); ++j) {
                auto& g = groups_[j];
                if (!g.working && static_cast<int>(g.occupants.size()) >=
                                      config_.groups[j].thresholds.wake_at) {
                    g.working = true;
                    const std::vector<std::uint32_t> holders = g.occupants;
                    g.occupants.clear();
                    for (std::uint32_t slot : holders) start_service(slot, static_cast<int>(j));
                    changed = true;
                }
            }
        }
        power_rate_ = current_power_rate();
    }

    // -- threshold dynamics, buffer model ------------------------------------

    void settle_buffer() {
        bool changed = true;
        while (changed) {
            changed = false;

            // sleep: occupants are transferred to the head of the buffer in
            // original arrival order (oldest first)
            for (std::size_t j = 1; j < groups_.size(); ++j) {
                auto& g = groups_[j];
                const int occ = static_cast<int>(g.occupants.size());
                if (g.working &&
                    (occ < config_.groups[j].thresholds.sleep_below || occ == 0)) {
                    std::vector<std::uint32_t> movers(g.occupants.begin(), g.occupants.end());
                    std::sort(movers.begin(), movers.end(),
                              [&](std::uint32_t a, std::uint32_t b) {
                                  return customers_[a].arrival_seq > customers_[b].arrival_seq;
                              });
                    g.occupants.clear();
                    g.working = false;
                    for (std::uint32_t slot : movers) {
                        interrupt_service(slot);
                        enter_buffer_front(slot);
                    }
                    changed = true;
                }
            }

            // dispatch: waiting customers enter idle work-on servers at once
            while (!buffer_.empty()) {
                int target = -1;
                for (std::size_t j = 0; j < groups_.size(); ++j) {
                    if (groups_[j].working &&
                        static_cast<int>(groups_[j].occupants.size()) < config_.groups[j].size) {
                        target = static_cast<int>(j);
                        break;
                    }
                }
                if (target < 0) break;
                const std::uint32_t slot = buffer_.front();
                buffer_.pop_front();
                start_service(slot, target);
                changed = true;
            }

            // wake: group j starts up only when every group to its left is
            // work-on and full, and the buffer has reached K_j
            for (std::size_t j = 1; j < groups_.size(); ++j) {
                auto& g = groups_[j];
                if (g.working) continue;
                if (static_cast<int>(buffer_.size()) < config_.groups[j].thresholds.wake_at)
                    continue;
                bool left_saturated = true;
                for (std::size_t i = 0; i < j; ++i) {
                    if (!groups_[i].working ||
                        static_cast<int>(groups_[i].occupants.size()) < config_.groups[i].size) {
                        left_saturated = false;
                        break;
                    }
                }
                if (!left_saturated) continue;
                g.working = true;
                const int take = std::min<int>(config_.groups[j].size,
                                               static_cast<int>(buffer_.size()));
                for (int k = 0; k < take; ++k) {
                    const std::uint32_t slot = buffer_.front();
                    buffer_.pop_front();
                    start_service(slot, static_cast<int>(j));
                }
                changed = true;
            }
        }
        power_rate_ = current_power_rate();
    }

    // -- audit ---------------------------------------------------------------

    void audit() const {
        auto fail = [&](const std::string& what) {
            throw SimulationError("invariant audit failed at t=" + std::to_string(now_) +
                                  ": " + what);
        };
        if (!groups_[0].working) fail("group 0 must be work-on");
        int total = static_cast<int>(buffer_.size());
        for (std::size_t j = 0; j < groups_.size(); ++j) {
            const auto& g = groups_[j];
            if (static_cast<int>(g.occupants.size()) > config_.groups[j].size)
                fail("group occupancy exceeds size");
            for (std::uint32_t slot : g.occupants) {
                const auto& c = customers_[slot];
                if (c.group != static_cast<int>(j)) fail("occupant group mismatch");
                if (g.working && c.where != Customer::Where::InService)
                    fail("working group carries a non-serving occupant");
                if (!g.working && c.where != Customer::Where::Held)
                    fail("sleeping group carries a serving occupant");
            }
            total += static_cast<int>(g.occupants.size());
        }
        if (!is_buffer_model_ && total > config_.total_servers())
            fail("loss model exceeded server capacity");
        for (std::uint32_t slot : buffer_) {
            if (customers_[slot].where != Customer::Where::InBuffer)
                fail("buffer entry not marked in-buffer");
        }
        if (is_buffer_model_ && !buffer_.empty()) {
            for (std::size_t j = 0; j < groups_.size(); ++j) {
                if (groups_[j].working &&
                    static_cast<int>(groups_[j].occupants.size()) < config_.groups[j].size)
                    fail("nonempty buffer while a work-on server is idle");
            }
        }
    }

    // -- wrap-up ---------------------------------------------------------------

    void finalize() {
        const double span = opt_.horizon - opt_.warmup;
        const double end = stats_.first_passage_time ? std::min(now_, opt_.horizon)
                                                     : opt_.horizon;
        const double window = std::max(0.0, std::min(end, opt_.horizon) - opt_.warmup);
        const double denom = stats_.first_passage_time ? (window > 0 ? window : span) : span;
        for (std::size_t j = 0; j < groups_.size(); ++j)
            stats_.group_count_avg[j] = group_integral_[j] / denom;
        stats_.system_count_avg = system_integral_ / denom;
        stats_.buffer_count_avg = buffer_integral_ / denom;
        stats_.held_count_avg = held_integral_ / denom;
        stats_.power_rate_avg = power_integral_ / denom;
        stats_.cumulative_power = phi_;
        stats_.end_time = now_;
        std::uint64_t in_system = buffer_.size();
        for (const auto& g : groups_) in_system += g.occupants.size();
        stats_.in_system_at_end = in_system;
    }

    // -- members ---------------------------------------------------------------

    SystemConfig config_;
    SimOptions opt_;
    RngStream arrival_rng_;
    RngStream patience_rng_;
    std::vector<RngStream> service_rng_;

    std::vector<GroupState> groups_;
    std::deque<std::uint32_t> buffer_;
    std::vector<Customer> customers_;
    std::vector<std::uint32_t> free_slots_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    std::uint64_t event_seq_ = 0;

    bool is_buffer_model_ = false;
    double theta_ = 0.0;
    double now_ = 0.0;
    double phi_ = 0.0;
    double power_rate_ = 0.0;
    bool stopped_ = false;

    double system_integral_ = 0.0;
    double buffer_integral_ = 0.0;
    double held_integral_ = 0.0;
    double power_integral_ = 0.0;
    std::vector<double> group_integral_;

    RunStats stats_;
};

}  // namespace detail

inline RunStats simulate(const SystemConfig& config, const SimOptions& opt) {
    detail::Simulator sim(config, opt);
    return sim.run();
}

inline RunStats simulate_loss(const SystemConfig& config, const SimOptions& opt) {
    if (config.buffer.kind != BufferKind::Loss)
        throw SimulationError("simulate_loss requires a loss-model configuration");
    return simulate(config, opt);
}

inline RunStats simulate_buffer(const SystemConfig& config, const SimOptions& opt) {
    if (config.buffer.kind != BufferKind::InfiniteWithImpatience)
        throw SimulationError("simulate_buffer requires an infinite-buffer configuration");
    if (config.buffer.theta == 0.0) {
        const double lambda = config.arrival_rate();
        const double mu0 = config.groups.at(0).service_rate();
        if (!(lambda < config.groups[0].size * mu0))
            throw SimulationError(
                "theta = 0 with arrival rate >= m0 * mu0 rejected as potentially unstable");
    }
    return simulate(config, opt);
}

/// Piecewise-linear cumulative power consumption reconstructed from a
/// trajectory: points (t, Phi(t)) at every event boundary plus the endpoint.
/// Slope between points is the power rate in force over that segment.
inline std::vector<std::pair<double, double>> power_trajectory(const RunStats& run) {
    if (!run.trajectory_collected)
        throw SimulationError("run was executed without trajectory collection");
    std::vector<std::pair<double, double>> out;
    out.reserve(run.trajectory.size() + 2);
    double phi = 0.0;
    double prev_t = 0.0;
    double prev_rate = run.initial_power_rate;
    out.emplace_back(0.0, 0.0);
    for (const auto& p : run.trajectory) {
        phi += prev_rate * (p.time - prev_t);
        out.emplace_back(p.time, phi);
        prev_t = p.time;
        prev_rate = p.power_rate;
    }
    if (run.end_time > prev_t)
        out.emplace_back(run.end_time, phi + prev_rate * (run.end_time - prev_t));
    return out;
}

}  // namespace gsq
