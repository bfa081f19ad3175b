// Payload shapes of the map service API. The client never recomputes any
// of these values; it only displays them and applies the view basis.
export {};
