// SPDX-License-Identifier: Apache-2.0
#include "mixvote/sandbox_client.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace mixvote {

namespace {

constexpr double kReplySlack_s = 2.0;
constexpr double kExecSlack_s = 5.0;

int poll_ms(double seconds)
{
    return static_cast<int>(std::max(0.0, seconds) * 1000.0);
}

int connect_with_timeout(const std::string& host, int port, double timeout_s)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto port_str = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res); rc != 0)
        throw std::runtime_error("sandbox: cannot resolve " + host + ": " + ::gai_strerror(rc));
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);

    std::string last_error = "no address";
    for (auto* ai = res; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0)
            continue;
        const int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc < 0 && errno == EINPROGRESS) {
            pollfd p{fd, POLLOUT, 0};
            const int ready = ::poll(&p, 1, poll_ms(timeout_s));
            if (ready == 1) {
                int err = 0;
                socklen_t len = sizeof err;
                ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
                rc = err == 0 ? 0 : -1;
                errno = err;
            } else {
                rc = -1;
                if (ready == 0)
                    errno = ETIMEDOUT;
            }
        }
        if (rc == 0) {
            ::fcntl(fd, F_SETFL, flags);
            return fd;
        }
        last_error = std::strerror(errno);
        ::close(fd);
    }
    throw std::runtime_error("sandbox: cannot connect to " + host + ":" + port_str + ": " + last_error);
}

ExecStatus parse_exec_status(const std::string& s)
{
    if (s == "ok")
        return ExecStatus::ok;
    if (s == "timeout")
        return ExecStatus::timeout;
    return ExecStatus::error;
}

class SocketLease final : public SandboxLease {
public:
    SocketLease(std::unique_ptr<LineSocket> sock, int worker, std::atomic<std::uint64_t>& ids)
        : sock_(std::move(sock)), worker_(worker), ids_(ids)
    {
    }

    ~SocketLease() override
    {
        try {
            sock_->send_json({{"op", "release"}});
        } catch (const std::exception&) {
        }
    }

    [[nodiscard]] int worker_id() const override { return worker_; }

    ExecResult execute(const std::string& code, double timeout_s) override
    {
        const std::string id = std::to_string(ids_.fetch_add(1));
        sock_->send_json({{"id", id}, {"code", code}, {"timeout_s", timeout_s}});
        const auto j = sock_->read_json(timeout_s + kExecSlack_s);
        if (j.value("id", std::string{}) != id)
            throw std::runtime_error("sandbox: response id does not match the request");
        ExecResult r;
        r.stdout_text = j.value("stdout", std::string{});
        r.stderr_text = j.value("stderr", std::string{});
        r.status = parse_exec_status(j.value("status", std::string{"error"}));
        r.elapsed_s = j.value("elapsed_s", 0.0);
        r.truncated = j.value("truncated", false);
        return r;
    }

    void reset() override
    {
        sock_->send_json({{"op", "reset"}});
        const auto j = sock_->read_json(kExecSlack_s + kReplySlack_s);
        if (j.value("status", std::string{}) != "ok")
            throw std::runtime_error("sandbox: reset failed: " + j.dump());
    }

private:
    std::unique_ptr<LineSocket> sock_;
    int worker_;
    std::atomic<std::uint64_t>& ids_;
};

} // namespace

LineSocket::LineSocket(const std::string& host, int port, double connect_timeout_s)
    : fd_(connect_with_timeout(host, port, connect_timeout_s))
{
}

LineSocket::~LineSocket()
{
    if (fd_ >= 0)
        ::close(fd_);
}

void LineSocket::send_json(const nlohmann::json& j)
{
    const std::string line = j.dump() + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
        const auto n = ::send(fd_, line.data() + off, line.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw std::runtime_error(std::string("sandbox: send failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

nlohmann::json LineSocket::read_json(double timeout_s)
{
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    for (;;) {
        if (const auto pos = buffer_.find('\n'); pos != std::string::npos) {
            const std::string line = buffer_.substr(0, pos);
            buffer_.erase(0, pos + 1);
            return nlohmann::json::parse(line);
        }
        const double left = std::chrono::duration<double>(deadline - std::chrono::steady_clock::now()).count();
        if (left <= 0)
            throw std::runtime_error("sandbox: reply timed out");
        pollfd p{fd_, POLLIN, 0};
        const int rc = ::poll(&p, 1, std::max(1, poll_ms(left)));
        if (rc < 0 && errno == EINTR)
            continue;
        if (rc <= 0)
            continue;
        char buf[4096];
        const auto n = ::recv(fd_, buf, sizeof buf, 0);
        if (n == 0)
            throw std::runtime_error("sandbox: connection closed");
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN)
                continue;
            throw std::runtime_error(std::string("sandbox: recv failed: ") + std::strerror(errno));
        }
        buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

SandboxClient::SandboxClient(std::string host, int port) : host_(std::move(host)), port_(port) {}

std::unique_ptr<SandboxLease> SandboxClient::acquire(double timeout_s)
{
    auto sock = std::make_unique<LineSocket>(host_, port_, timeout_s);
    sock->send_json({{"op", "acquire"}, {"timeout_s", timeout_s}});
    const auto j = sock->read_json(timeout_s + kReplySlack_s);
    if (j.value("status", std::string{}) != "ok")
        return nullptr;
    return std::make_unique<SocketLease>(std::move(sock), j.value("worker", -1), next_id_);
}

std::pair<std::string, int> parse_host_port(const std::string& spec)
{
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size())
        throw std::invalid_argument("expected host:port, got '" + spec + "'");
    int port = 0;
    try {
        port = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid port in '" + spec + "'");
    }
    if (port <= 0 || port > 65535)
        throw std::invalid_argument("port out of range in '" + spec + "'");
    return {spec.substr(0, colon), port};
}

} // namespace mixvote
