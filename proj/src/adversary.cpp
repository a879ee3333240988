#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include "stylearena/advloop.hpp"
#include "stylearena/errors.hpp"

namespace stylearena::advloop {

// ---------------------------------------------------------------- reference

ReferenceAdversary::ReferenceAdversary(MarginOracle oracle, std::vector<double> start, ReferenceOptions options)
    : oracle_(std::move(oracle)), start_(std::move(start)), options_(options), rng_(options.seed) {
    if (start_.empty()) {
        throw ValidationError("reference adversary: empty start vector");
    }
}

double ReferenceAdversary::query(std::span<const double> x) {
    ++queries_;
    return oracle_(x);
}

Draft ReferenceAdversary::step(const AdversaryContext& context) {
    const Draft& current = context.current;
    if (options_.step_scale == 0.0) {
        return current;
    }
    const auto dim = static_cast<Eigen::Index>(start_.size());
    Eigen::VectorXd x = current.vector ? Eigen::Map<const Eigen::VectorXd>(current.vector->data(), dim)
                                       : Eigen::Map<const Eigen::VectorXd>(start_.data(), dim);
    const double m = context.margin;
    const double norm = x.norm() > 0.0 ? x.norm() : 1.0;
    const double h = options_.probe_size * norm;

    const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(options_.probes), dim);
    std::vector<Eigen::VectorXd> basis;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index p = 0; p < k; ++p) {
        Eigen::VectorXd u(dim);
        for (Eigen::Index d = 0; d < dim; ++d) {
            u[d] = rng_.normal();
        }
        for (const auto& b : basis) {
            u -= u.dot(b) * b;
        }
        if (u.norm() < 1e-12) {
            continue;
        }
        u.normalize();
        basis.push_back(u);
        const Eigen::VectorXd probe = x + h * u;
        const double slope = (query(std::span<const double>(probe.data(), probe.size())) - m) / h;
        grad += slope * u;
    }
    const double gnorm = grad.norm();
    if (gnorm == 0.0) {
        return current;
    }
    const double length = std::min(options_.step_scale * (std::abs(m) + 1.0) / gnorm, options_.max_step * norm);
    const Eigen::VectorXd cand = x - (length / gnorm) * grad;
    const double mc = query(std::span<const double>(cand.data(), cand.size()));
    if (!(mc < m)) {
        return current;
    }
    Draft next;
    next.ref = context.target + "/ref/" + std::to_string(context.iteration);
    next.text = current.text;
    next.vector = std::vector<double>(cand.data(), cand.data() + cand.size());
    return next;
}

// ---------------------------------------------------------------- external process

ExecAdversary::ExecAdversary(const std::string& command) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
        throw IoError(std::string("exec adversary: socketpair failed: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw IoError(std::string("exec adversary: fork failed: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
        ::close(fds[0]);
        ::dup2(fds[1], STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::close(fds[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    to_child_ = fds[0];
    from_child_ = fds[0];
}

ExecAdversary::~ExecAdversary() {
    if (to_child_ >= 0) {
        ::shutdown(to_child_, SHUT_WR);
        ::close(to_child_);
    }
    if (pid_ > 0) {
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }
}

Draft ExecAdversary::step(const AdversaryContext& context) {
    Json req;
    Json ctx;
    ctx["target"] = context.target;
    ctx["scenario"] = context.scenario;
    ctx["planning"] = context.planning;
    ctx["iteration"] = context.iteration;
    req["context"] = ctx;
    req["draft"] = {{"ref", context.current.ref}, {"text", context.current.text}};
    req["margin"] = context.margin;
    req["history"] = Json::array();
    for (const auto& r : context.history) {
        req["history"].push_back({{"iter", r.iter}, {"draft_ref", r.draft_ref}, {"margin", r.margin},
                                  {"accepted", r.accepted}});
    }
    const std::string line = req.dump() + "\n";
    std::size_t sent = 0;
    while (sent < line.size()) {
        const ssize_t n = ::send(to_child_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) {
            throw IoError("exec adversary: write failed (process exited?)");
        }
        sent += static_cast<std::size_t>(n);
    }
    std::size_t nl;
    while ((nl = buffer_.find('\n')) == std::string::npos) {
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
        if (n <= 0) {
            throw IoError("exec adversary: no response (process exited?)");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
    const std::string reply = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);

    Draft d;
    try {
        const Json j = Json::parse(reply);
        const Json& dj = j.at("draft");
        d.ref = dj.at("ref").get<std::string>();
        d.text = dj.value("text", std::string());
        if (dj.contains("v")) {
            d.vector = dj.at("v").get<std::vector<double>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("exec adversary: malformed reply: ") + e.what());
    }
    if (d.ref.empty()) {
        throw ValidationError("exec adversary: reply draft has an empty ref");
    }
    return d;
}

}  // namespace stylearena::advloop
