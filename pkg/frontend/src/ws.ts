// Browser transport: one JSON frame per websocket message.

import type { Transport } from "./client.js";

export const connectWebSocket = (url: string): Promise<Transport> =>
  new Promise((resolve, reject) => {
    const socket = new WebSocket(url);
    let messageCb: (text: string) => void = () => {};
    let closeCb: () => void = () => {};
    const transport: Transport = {
      send: (text) => socket.send(text),
      close: () => socket.close(),
      onMessage: (cb) => {
        messageCb = cb;
      },
      onClose: (cb) => {
        closeCb = cb;
      },
    };
    socket.onmessage = (event) => {
      if (typeof event.data === "string") {
        messageCb(event.data);
      }
    };
    socket.onclose = () => closeCb();
    socket.onopen = () => resolve(transport);
    socket.onerror = () => reject(new Error(`cannot reach ${url}`));
  });
