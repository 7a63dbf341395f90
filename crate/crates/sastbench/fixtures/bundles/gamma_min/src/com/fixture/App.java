package com.fixture.gamma;

import android.util.Log;

public class App {
    static final String FEED = "http://feeds.example.com/v1";

    void trace(String state) {
        Log.d("gamma", state);
    }
}
