import { Client } from "./api.js";
import { StudioStore } from "./state.js";
import { StudioApp } from "./views.js";

const SERVICE_URL = (window as { MAPMOTION_SERVICE_URL?: string }).MAPMOTION_SERVICE_URL ?? "";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}

const client = new Client(SERVICE_URL);
const store = new StudioStore();
const app = new StudioApp({ client, store, root });

const params = new URLSearchParams(window.location.search);
const projectId = params.get("project");
if (projectId) {
  void app.reload(projectId).then(() => app.loadStream());
}
