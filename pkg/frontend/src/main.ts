import { ApiClient } from "./api.ts";
import { mountApp } from "./app.ts";

const root = document.getElementById("app");
if (root !== null) {
  mountApp(root, new ApiClient());
}
