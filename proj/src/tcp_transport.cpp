#include "miver/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

#include "miver/json_io.hpp"

namespace miver {

namespace {

struct HostPort {
    std::string host;
    std::uint16_t port;
};

HostPort split_host_port(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("address '" + addr + "' needs host:port");
    HostPort hp;
    hp.host = addr.substr(0, colon);
    hp.port = static_cast<std::uint16_t>(std::stoi(addr.substr(colon + 1)));
    if (hp.host.empty()) hp.host = "0.0.0.0";
    return hp;
}

bool send_all(int fd, const void* data, std::size_t len) {
    const char* p = static_cast<const char*>(data);
    while (len > 0) {
        ssize_t n = ::send(fd, p, len, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return false;
        }
        p += n;
        len -= static_cast<std::size_t>(n);
    }
    return true;
}

bool recv_all(int fd, void* data, std::size_t len) {
    char* p = static_cast<char*>(data);
    while (len > 0) {
        ssize_t n = ::recv(fd, p, len, 0);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return false;
        }
        p += n;
        len -= static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace

TcpTransport::TcpTransport(const std::string& bind_addr,
                           const std::vector<std::string>& peers, bool compress)
    : compress_(compress) {
    for (const std::string& p : peers) peers_.push_back({p, -1, false});

    HostPort hp = split_host_port(bind_addr);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(hp.port);
    if (::inet_pton(AF_INET, hp.host.c_str(), &sa.sin_addr) != 1)
        sa.sin_addr.s_addr = INADDR_ANY;
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0 ||
        ::listen(listen_fd_, 16) < 0) {
        ::close(listen_fd_);
        throw std::runtime_error("cannot listen on " + bind_addr);
    }
    // Accept with a timeout so shutdown is prompt.
    timeval tv{0, 200000};
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    accept_thread_ = std::thread([this]() { accept_loop(); });
}

TcpTransport::~TcpTransport() {
    stop_.store(true);
    if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
    {
        std::lock_guard<std::mutex> lock(readers_mu_);
        for (int fd : reader_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    for (std::thread& t : readers_)
        if (t.joinable()) t.join();
    {
        std::lock_guard<std::mutex> lock(readers_mu_);
        for (int fd : reader_fds_) ::close(fd);
    }
    if (listen_fd_ >= 0) ::close(listen_fd_);
    for (Peer& p : peers_)
        if (p.fd >= 0) ::close(p.fd);
}

void TcpTransport::accept_loop() {
    while (!stop_.load()) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (stop_.load()) break;
            continue;
        }
        {
            std::lock_guard<std::mutex> lock(readers_mu_);
            reader_fds_.push_back(fd);
            readers_.emplace_back([this, fd]() { reader_loop(fd); });
        }
    }
}

void TcpTransport::reader_loop(int fd) {
    while (!stop_.load()) {
        std::uint8_t hdr[4];
        if (!recv_all(fd, hdr, 4)) break;
        std::uint32_t len = (std::uint32_t(hdr[0]) << 24) |
                            (std::uint32_t(hdr[1]) << 16) |
                            (std::uint32_t(hdr[2]) << 8) | std::uint32_t(hdr[3]);
        if (len == 0 || len > (64u << 20)) break;  // corrupt frame
        std::string payload(len, '\0');
        if (!recv_all(fd, payload.data(), len)) break;
        try {
            Message msg = message_from_json(json::parse(payload));
            std::lock_guard<std::mutex> lock(inbox_mu_);
            inbox_.push_back(std::move(msg));
        } catch (const std::exception&) {
            break;  // malformed peer, drop the connection
        }
    }
}

bool TcpTransport::ensure_connected(Peer& peer) {
    if (peer.fd >= 0) return true;
    if (peer.dead) return false;
    HostPort hp = split_host_port(peer.addr);
    // Peers start in arbitrary order; retry for a while before giving up.
    for (int attempt = 0; attempt < 50 && !stop_.load(); ++attempt) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) break;
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(hp.port);
        if (::inet_pton(AF_INET, hp.host.c_str(), &sa.sin_addr) != 1) {
            hostent* he = ::gethostbyname(hp.host.c_str());
            if (!he || !he->h_addr_list[0]) {
                ::close(fd);
                break;
            }
            std::memcpy(&sa.sin_addr, he->h_addr_list[0], sizeof(sa.sin_addr));
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            peer.fd = fd;
            return true;
        }
        ::close(fd);
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    peer.dead = true;
    healthy_.store(false);
    return false;
}

void TcpTransport::broadcast(const Message& msg) {
    std::string payload = message_to_json(msg, compress_).dump();
    std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    std::uint8_t hdr[4] = {std::uint8_t(len >> 24), std::uint8_t(len >> 16),
                           std::uint8_t(len >> 8), std::uint8_t(len)};
    std::lock_guard<std::mutex> lock(send_mu_);
    for (Peer& peer : peers_) {
        if (!ensure_connected(peer)) continue;
        if (!send_all(peer.fd, hdr, 4) ||
            !send_all(peer.fd, payload.data(), payload.size())) {
            ::close(peer.fd);
            peer.fd = -1;
            peer.dead = true;
            healthy_.store(false);
        }
    }
}

std::optional<Message> TcpTransport::poll() {
    std::lock_guard<std::mutex> lock(inbox_mu_);
    if (inbox_.empty()) return std::nullopt;
    Message msg = std::move(inbox_.front());
    inbox_.pop_front();
    return msg;
}

}  // namespace miver
