package com.fixture.alpha;

import android.webkit.WebView;

public class Web {
    public void configure(WebView webview) {
        webview.getSettings().setJavaScriptEnabled(true);
        webview.getSettings().setAllowFileAccess(true);
    }
}
