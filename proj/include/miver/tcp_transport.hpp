#ifndef MIVER_TCP_TRANSPORT_HPP_
#define MIVER_TCP_TRANSPORT_HPP_

#include <atomic>
#include <deque>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "miver/cluster.hpp"

namespace miver {

/// Full-mesh TCP transport. Frames are a 4-byte big-endian length
/// followed by one JSON message document. Each node listens on its bind
/// address and pushes frames from every accepted connection into a
/// single inbox; broadcast opens (lazily, with retries) one outbound
/// connection per peer.
class TcpTransport : public Transport {
  public:
    TcpTransport(const std::string& bind_addr,
                 const std::vector<std::string>& peers, bool compress = false);
    ~TcpTransport() override;

    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    void broadcast(const Message& msg) override;
    std::optional<Message> poll() override;
    bool healthy() const override { return healthy_.load(); }

  private:
    struct Peer {
        std::string addr;
        int fd = -1;
        bool dead = false;
    };

    void accept_loop();
    void reader_loop(int fd);
    bool ensure_connected(Peer& peer);

    int listen_fd_ = -1;
    bool compress_;
    std::atomic<bool> stop_{false};
    std::atomic<bool> healthy_{true};
    std::thread accept_thread_;
    std::vector<std::thread> readers_;
    std::mutex readers_mu_;
    std::vector<int> reader_fds_;
    std::mutex inbox_mu_;
    std::deque<Message> inbox_;
    std::mutex send_mu_;
    std::vector<Peer> peers_;
};

}  // namespace miver

#endif  // MIVER_TCP_TRANSPORT_HPP_
